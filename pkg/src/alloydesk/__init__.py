"""Bounded model finding, sketch solving, and LLM-task validation for a
fragment of the Alloy specification language.

The pieces compose in one direction: schemas and instances (schema) feed
the formula AST (formulas), the parser/renderer (parser), and the
evaluator; the checker sweeps all bounded instances to judge equivalence;
sketches (sketch) enumerate hole completions against that checker; the
corpus ships eleven classic graph/relation properties; and the LLM
harness (llm) plus pipeline/cli wrap the whole loop.
"""

from .checker import (
    CheckConfig,
    EquivalenceResult,
    Verdict,
    all_instances,
    check_equivalence,
    classify,
    find_instances,
    semantic_partition,
)
from .corpus import (
    CorpusEntry,
    ValidationError,
    builtin_corpus,
    dump_corpus,
    get_entry,
    load_corpus,
)
from .evaluator import eval_expr, eval_formula, eval_int_expr
from .formulas import IllTypedError, arity_of
from .llm import (
    ClassifiedCandidate,
    EmptyResponseError,
    HTTPTransport,
    HTTPTransportConfig,
    LLMResponse,
    MissingFieldError,
    PromptRequest,
    ReplayTransport,
    TaskKind,
    TaskRun,
    Transport,
    TransportError,
    build_prompt,
    extract_candidates,
    run_task,
)
from .parser import ParseError, normalize, parse_formula_body, render
from .pipeline import (
    ReportRow,
    append_audit,
    classify_batch,
    markdown_report,
    read_audit,
    reclassify_record,
    record_from_task_run,
    row_from_record,
    row_from_task_run,
)
from .schema import (
    FieldDecl,
    Instance,
    Multiplicity,
    Schema,
    SchemaError,
    SigDecl,
    Universe,
    enumerate_instances,
    enumerate_universes,
    parse_schema,
    validate_instance,
)
from .sketch import (
    CandidateSet,
    Completion,
    CompletionStream,
    Hole,
    HoleKind,
    Sketch,
    enumerate_completions,
    expand_candidate_set,
    first_solution,
    parse_sketch,
    solve_sketch,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "CheckConfig",
    "ClassifiedCandidate",
    "Completion",
    "CompletionStream",
    "CorpusEntry",
    "EmptyResponseError",
    "EquivalenceResult",
    "FieldDecl",
    "HTTPTransport",
    "HTTPTransportConfig",
    "Hole",
    "HoleKind",
    "IllTypedError",
    "Instance",
    "LLMResponse",
    "MissingFieldError",
    "Multiplicity",
    "ParseError",
    "PromptRequest",
    "ReplayTransport",
    "ReportRow",
    "Schema",
    "SchemaError",
    "SigDecl",
    "Sketch",
    "TaskKind",
    "TaskRun",
    "Transport",
    "TransportError",
    "Universe",
    "ValidationError",
    "Verdict",
    "all_instances",
    "append_audit",
    "arity_of",
    "build_prompt",
    "builtin_corpus",
    "check_equivalence",
    "classify",
    "classify_batch",
    "dump_corpus",
    "enumerate_completions",
    "enumerate_instances",
    "enumerate_universes",
    "eval_expr",
    "eval_formula",
    "eval_int_expr",
    "expand_candidate_set",
    "extract_candidates",
    "find_instances",
    "first_solution",
    "get_entry",
    "load_corpus",
    "markdown_report",
    "normalize",
    "parse_formula_body",
    "parse_schema",
    "parse_sketch",
    "read_audit",
    "reclassify_record",
    "record_from_task_run",
    "render",
    "row_from_record",
    "row_from_task_run",
    "run_task",
    "semantic_partition",
    "solve_sketch",
    "validate_instance",
    "__version__",
]
