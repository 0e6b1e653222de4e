"""Human-AI toolkit for building linearized multi-party conversations (MPCs)
from debate reply trees: parsing and querying trees, turn-by-turn thread
construction with soft-rule linting, LLM-assisted normalization / profiling /
refinement, synthetic debate generation, and evaluation metrics.
"""

from .draft import (
    EVERYONE,
    DraftConversation,
    LintFinding,
    Turn,
    append_turn,
    create_draft,
    drafts_equivalent,
    edit_text,
    export_conversation,
    lint_draft,
    parse_draft,
    remove_turn,
    reorder_turn,
    serialize_draft,
    set_addressees,
    set_status,
)
from .errors import LlmberjackError
from .generate import (
    GenerationSpec,
    PresetTopic,
    StubDebateTransport,
    default_spec,
    define_users,
    expected_node_count,
    generate_tree,
    preset_topics,
)
from .metrics import (
    AgreementReport,
    PairwiseJudgment,
    SessionRecord,
    build_report,
    preference_percentages,
    render_report,
    token_speed,
    turn_speed,
    weighted_cohen_kappa,
)
from .refine import (
    Length,
    RefinementConstraints,
    RefinementSuggestion,
    Style,
    Temperament,
    apply_decision,
    build_profile_prompt,
    build_refinement_prompt,
    normalize_tree,
    refine_message,
    refine_profile,
    select_profile_evidence,
    whitespace_tokens,
)
from .transport import (
    NORMALIZE,
    PROFILE,
    REFINE,
    ChatTransport,
    EchoTransport,
    FixtureTransport,
    GenerationConfig,
    HttpChatTransport,
    ScriptedTransport,
)
from .tree import (
    DEFAULT_PROFILE_DESCRIPTION,
    FocusedView,
    MessageNode,
    ReplyTree,
    SpeakerProfile,
    ensure_users,
    focused_view,
    nodes_by_author,
    parse_discussion,
    serialize_discussion,
    subtree,
    tree_from_document,
    tree_to_document,
)

__version__ = "0.1.0"
