"""Verilog-subset front end: parsing, printing, interface extraction."""
from .ast import AssertionDecl, PortDecl, SourceModule
from .parser import parse, parse_files
from .printer import format_module, format_source
from .spec import DesignSpec, extract_spec, read_spec_xml, write_spec_xml

__all__ = [
    "AssertionDecl", "DesignSpec", "PortDecl", "SourceModule", "extract_spec", "format_module",
    "format_source", "parse", "parse_files", "read_spec_xml", "write_spec_xml",
]
