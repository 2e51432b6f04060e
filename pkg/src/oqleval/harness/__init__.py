"""Few-shot prompting, generation, refinement and evaluation reports."""
