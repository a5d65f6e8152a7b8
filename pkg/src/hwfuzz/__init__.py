"""Coverage-guided fuzzing of synthesizable Verilog designs."""
__version__ = "0.1.0"
