// Build-time API base URL: the one knob this app has. Point it at the
// backend service before building (empty string = same origin).
export const API_BASE_URL = 'http://127.0.0.1:8080';
