"""Elaboration, compiled simulation, and waveform output."""
from .netlist import Netlist, Signal, CovPoint, ContAssign, Process, Assertion, elaborate, elaborate_testbench
from .simulator import RunConfig, RunResult, CrashInfo, SimState, new_state, step_cycle, eval_assertions, run_testcase, run_testbench

__all__ = ["Netlist", "Signal", "CovPoint", "ContAssign", "Process", "Assertion", "elaborate",
           "elaborate_testbench", "RunConfig", "RunResult", "CrashInfo", "SimState", "new_state",
           "step_cycle", "eval_assertions", "run_testcase", "run_testbench"]
