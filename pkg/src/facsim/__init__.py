"""Redundant and approximate adder simulation with fault injection."""

from facsim._backend import NAME as BACKEND
from facsim.generators import (
    RedundantCircuit,
    Scheme,
    build_cla,
    build_fac,
    build_imprecise_adder,
    build_mvrpr,
    build_single,
    build_tmr,
    build_voter,
)
from facsim.netlist import Fault, FaultKind, GateKind, Netlist, evaluate, evaluate_with_fault, validate
from facsim.words import AdderSpec, Strategy, Word, error_stats, exact_add, imprecise_add

__version__ = "0.1.0"
