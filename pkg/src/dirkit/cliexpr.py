"""Restricted numeric expression compiler for config files and custom pdfs.

Only whitelisted numpy functions, the listed variables, and arithmetic are
allowed; no attribute access or builtins reach the evaluated code.
"""

import numpy as np

_SAFE_NAMES = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "arcsin": np.arcsin, "arccos": np.arccos, "arctan": np.arctan,
    "arctan2": np.arctan2, "atan2": np.arctan2,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "floor": np.floor, "ceil": np.ceil, "mod": np.mod, "power": np.power,
    "minimum": np.minimum, "maximum": np.maximum,
    "pi": np.pi, "e": np.e, "tau": 2 * np.pi,
}


def compile_expression(expr, variables=("x",)):
    """Callable of ``variables`` evaluating ``expr`` in a whitelisted namespace."""
    if not isinstance(expr, str) or not expr.strip():
        raise ValueError("expression must be a nonempty string")
    code = compile(expr, "<expression>", "eval")
    for name in code.co_names:
        if name not in _SAFE_NAMES and name not in variables:
            raise ValueError("expression uses disallowed name %r" % name)

    def fn(*args):
        if len(args) != len(variables):
            raise TypeError("expression expects %d argument(s)" % len(variables))
        scope = dict(_SAFE_NAMES)
        scope.update(zip(variables, args))
        return eval(code, {"__builtins__": {}}, scope)

    return fn
