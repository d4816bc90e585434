"""Label vectors: which B_h labels sit in which quantization bin."""
from ..quantize import hull_bins


def build_label_vector(hull_plus, hull_minus, grid, a_minus, a_plus):
    """Sparse map bin -> a_plus, a_minus, or their sum when both hulls use the bin."""
    v = {}
    for b in hull_bins(hull_plus, grid) if hull_plus is not None else []:
        v[b] = v.get(b, 0) + int(a_plus)
    for b in hull_bins(hull_minus, grid) if hull_minus is not None else []:
        v[b] = v.get(b, 0) + int(a_minus)
    return v


def split_label_vector(v, a_minus, a_plus):
    """Inverse of build_label_vector on the bin level: (plus bins, minus bins)."""
    plus, minus = [], []
    both = int(a_minus) + int(a_plus)
    for b, val in sorted(v.items()):
        if val == a_plus or val == both:
            plus.append(b)
        if val == a_minus or val == both:
            minus.append(b)
        if val not in (a_plus, a_minus, both):
            raise ValueError(f"bin {b} carries {val}, not a label of this client")
    return plus, minus
