"""Operation counter wrapped around any provider (the provider itself stays pure)."""
from collections import Counter


class CountingProvider:
    """Delegates to ``inner`` and tallies calls by operation name."""

    _COUNTED = ("encrypt", "decrypt", "add", "sub", "mul", "mul_plain", "sum")

    def __init__(self, inner):
        self.inner = inner
        self.counts = Counter()

    def __getattr__(self, name):
        attr = getattr(self.inner, name)
        if name in self._COUNTED:
            def counted(*args, **kwargs):
                self.counts[name] += 1
                return attr(*args, **kwargs)
            return counted
        return attr

    def reset(self):
        self.counts.clear()
