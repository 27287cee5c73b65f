"""Leveled concept units: a small object language, its interpreter, and the
redescription passes that climb recordings from bound instances to
cooperating class families."""

__version__ = "0.1.0"
