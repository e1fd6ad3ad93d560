import os


class BudgetExceeded(RuntimeError):
    """A search visited more nodes than it was allowed to."""


def node_budget(explicit=None):
    """explicit if given, else RBR_NODE_BUDGET from the environment, else None."""
    if explicit is not None:
        return explicit
    raw = os.environ.get("RBR_NODE_BUDGET", "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"RBR_NODE_BUDGET must be an integer, got {raw!r}") from None
    return value if value > 0 else None
