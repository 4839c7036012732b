"""shortform: long-form to short-form video repurposing with human-in-the-loop editing."""

__version__ = "0.1.0"
