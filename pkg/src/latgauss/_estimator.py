"""Shared parameter handling for the fitted estimator objects."""

import inspect


class ParamMixin:
    """get_params/set_params over the constructor keywords.

    Constructor arguments are stored verbatim on the instance under their
    own names; fitted state lives in trailing-underscore attributes, so an
    estimator rebuilt from get_params starts clean.
    """

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"unknown parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"
