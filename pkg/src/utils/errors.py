"""
Exception hierarchy
"""


class InterSdnError(Exception):
    """Base class for all application errors"""
    pass


class ConfigError(InterSdnError):
    """Invalid or missing experiment configuration"""
    pass


class DomainError(InterSdnError, ValueError):
    """Argument outside the domain of an analytic expression"""
    pass


class EmptyObservations(InterSdnError):
    """No path observations to fit"""
    pass


class DegenerateProfile(InterSdnError):
    """Centrality profile cannot produce an odds ratio"""
    pass


class DegenerateDegree(InterSdnError):
    """A bgp-degree of zero inside the chain domain"""
    pass


class ParseError(InterSdnError):
    """Malformed input file"""
    pass


class ConflictError(InterSdnError):
    """Contradicting records for the same AS pair"""
    pass


class UnlabeledGraph(InterSdnError):
    """Policy routing requested on a graph without relationship labels"""
    pass


class EmptySample(InterSdnError):
    """Statistic requested over an empty sample"""
    pass


class MissingProfile(InterSdnError):
    """Centrality-based selection without a centrality profile"""
    pass


class DisconnectedSource(InterSdnError):
    """The announcing node reaches no other node"""
    pass


class MissingResults(InterSdnError):
    """Results directory holds nothing to plot"""
    pass
