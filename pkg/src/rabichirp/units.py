"""Unit conversions.

Everything inside the library is expressed in atomic units with hbar = 1;
only the CLI converts to and from laboratory time units. The atomic unit
of time is a fixed external constant, printed in output metadata so files
are self-describing.
"""

# seconds per atomic time unit (CODATA value, truncated)
AU_TIME_S = 2.418884326509e-17

NS_PER_AU = AU_TIME_S * 1e9
AU_PER_NS = 1.0 / NS_PER_AU


def au_to_ns(t_au: float) -> float:
    return t_au * NS_PER_AU


def ns_to_au(t_ns: float) -> float:
    return t_ns * AU_PER_NS
