from .app import create_parser, main
