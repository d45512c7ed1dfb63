"""Typed-dataflow dialogue and request generation."""

from .errors import (
    AmbiguousError,
    ArityMismatchError,
    CycleError,
    DataflowError,
    EvaluationError,
    ExpressionSyntaxError,
    MalformedLineError,
    MissingTemplateError,
    NoConversationRootError,
    NoMatchError,
    NoSolutionError,
    ReferTargetAbsentError,
    RegistryError,
    RootMismatchError,
    TypeMismatchError,
    UnknownFieldError,
    UnknownFunctionError,
    UnknownSlotError,
)
from .types import FunctionSignature, Registry, SlotSpec
from .graph import (
    DataflowGraph,
    Node,
    canonical_key,
    equivalent,
    serialize,
    typecheck,
)
from .parser import parse_expression
from .evaluate import EvalContext, evaluate
from .mapping import (
    ExtensionPoint,
    ExtensionPolicy,
    Mapping,
    OpenSlot,
    extensible_nodes,
    map_graphs,
)
from .simulator import (
    AgentResponse,
    Assignment,
    Dialogue,
    Persona,
    Turn,
    UserRequest,
    extract_agenda,
    realize_expression,
    run_dialogue,
    select_action,
)
from .composer import (
    CompositionConfig,
    DEFAULT_RULES,
    ReplacementRule,
    candidate_functions,
    generate_first_turn,
    replace_value,
    replacement_depth,
)
from .corpus import (
    CorpusPair,
    MixSpec,
    dedupe,
    make_pair,
    mix,
    read_pairs,
    structure_key,
    write_pairs,
)
from .nlg import Template, TemplateSet, render

__version__ = "0.1.0"
