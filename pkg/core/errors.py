# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""


class SimulationError(RuntimeError):
    """Base of all errors raised while stepping a world."""

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step

    def __str__(self):
        msg = super().__str__()
        if self.step is not None:
            return "step %d: %s" % (self.step, msg)
        return msg


class PointOutOfDomain(SimulationError):

    def __init__(self, indices, msg=None):
        self.indices = list(indices)
        msg = msg or "material points %s left the grid stencil region" \
            % self.indices[:10]
        super().__init__(msg)


class StabilityViolation(SimulationError):

    def __init__(self, dt, dt_min):
        self.dt = dt
        self.dt_min = dt_min
        super().__init__("dt = %.6g exceeds critical dt = %.6g" % (dt, dt_min))


class NoMobileObjects(SimulationError):
    pass


class DegenerateGeometry(ValueError):
    pass


class RegionOutsideDomain(ValueError):
    pass


class FitDegenerate(ValueError):
    pass


class ParseError(ValueError):

    def __init__(self, msg, path=None, line=None):
        self.path = path
        self.line = line
        where = path or '<string>'
        if line is not None:
            where = '%s:%d' % (where, line)
        super().__init__('%s: %s' % (where, msg))


class ValidationError(ValueError):
    """
    Collected configuration violations.

    :param violations: list of (rule_id, message).
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = ['[%s] %s' % v for v in self.violations]
        super().__init__('%d violation(s):\n  ' % len(lines) + '\n  '.join(lines))

    @property
    def rules(self):
        return [v[0] for v in self.violations]
