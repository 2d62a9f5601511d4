"""Parsing of small call-style descriptors such as ``affine(2, 0.5, 0)``.

Descriptors appear in config files and on the command line.  They are
parsed with :mod:`ast` into nested ``(name, args)`` tuples; only calls,
names, numeric literals, unary minus and simple arithmetic are accepted.
"""
import ast
import operator

from .errors import DescriptorError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _convert(node):
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name):
            raise DescriptorError("descriptor calls must use plain names")
        if node.keywords:
            raise DescriptorError("keyword arguments are not supported in descriptors")
        return (node.func.id, tuple(_convert(a) for a in node.args))
    if isinstance(node, ast.Name):
        # bare name == call without arguments
        return (node.id, ())
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _convert(node.operand)
        if not isinstance(v, float):
            raise DescriptorError("unary sign applies to numbers only")
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _convert(node.left), _convert(node.right)
        if not (isinstance(left, float) and isinstance(right, float)):
            raise DescriptorError("arithmetic applies to numbers only")
        return float(_BINOPS[type(node.op)](left, right))
    raise DescriptorError(f"unsupported descriptor syntax: {ast.dump(node)}")


def parse(text):
    """Parse ``text`` into a ``(name, args)`` tree or a float."""
    if not isinstance(text, str):
        raise DescriptorError(f"descriptor must be a string, got {type(text).__name__}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise DescriptorError(f"cannot parse descriptor {text!r}: {exc.msg}") from None
    return _convert(tree.body)


def numbers(args, name, lo, hi=None):
    """Check that ``args`` are all numbers and their count is in [lo, hi]."""
    hi = lo if hi is None else hi
    if not lo <= len(args) <= hi:
        want = str(lo) if lo == hi else f"{lo}-{hi}"
        raise DescriptorError(f"{name}() takes {want} arguments, got {len(args)}")
    if not all(isinstance(a, float) for a in args):
        raise DescriptorError(f"{name}() arguments must be numbers")
    return list(args)
