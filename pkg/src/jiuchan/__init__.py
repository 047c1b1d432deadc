"""Static entanglement analysis for a Q# subset.

Pipeline: parse (.qs) -> resolve -> lower to operation lines -> build
CFG/call graph/ICFG -> stack-based dataflow with uncomputation tracking,
intra- and interprocedurally -> entanglement graphs per program point.
A dense state-vector oracle verifies the separability claims on small
programs.
"""

from .analysis import (
    Analyzer,
    AnalysisResult,
    AnalysisState,
    Assumptions,
    EntanglementGraph,
    OpStack,
    OperationSummary,
    QubitState,
    StackEntry,
    analyze_program,
    check_controlled,
    check_executed,
    check_fundamental,
    check_inverse,
    wrap_lines,
)
from .ast_nodes import OperationDecl, SourceProgram
from .errors import Diagnostic, JiuchanError
from .frontend import load_program, parse_program, print_program, resolve_references
from .gates import DEFAULT_LIBRARY, GateLibrary
from .graphs import Cfg, CallGraph, Icfg, ProgramPoint, build_call_graph, build_cfg, build_icfg
from .ir import (
    CondAtom,
    Condition,
    Functor,
    GateParam,
    LoweredOperation,
    OperationLine,
    QubitRef,
    format_line,
)
from .lower import (
    LoweringOptions,
    build_condition,
    fold_param,
    lower_operation,
    lower_program,
    lower_statement,
)
from .oracle import (
    FlatProgram,
    StateVector,
    VerifyReport,
    flatten_program,
    is_separable_partition,
    reduced_purity,
    simulate,
    verify_analysis,
)

__version__ = "0.1.0"

__all__ = [
    "Analyzer",
    "AnalysisResult",
    "AnalysisState",
    "Assumptions",
    "CallGraph",
    "Cfg",
    "CondAtom",
    "Condition",
    "DEFAULT_LIBRARY",
    "Diagnostic",
    "EntanglementGraph",
    "FlatProgram",
    "Functor",
    "GateLibrary",
    "GateParam",
    "Icfg",
    "JiuchanError",
    "LoweredOperation",
    "LoweringOptions",
    "OperationDecl",
    "OperationLine",
    "OperationSummary",
    "OpStack",
    "ProgramPoint",
    "QubitRef",
    "QubitState",
    "SourceProgram",
    "StackEntry",
    "StateVector",
    "VerifyReport",
    "analyze_program",
    "build_call_graph",
    "build_cfg",
    "build_condition",
    "build_icfg",
    "check_controlled",
    "check_executed",
    "check_fundamental",
    "check_inverse",
    "flatten_program",
    "fold_param",
    "format_line",
    "is_separable_partition",
    "load_program",
    "lower_operation",
    "lower_program",
    "lower_statement",
    "parse_program",
    "print_program",
    "reduced_purity",
    "resolve_references",
    "simulate",
    "verify_analysis",
    "wrap_lines",
]
