"""Unit conversions. Everything inside the package is in Hartree atomic units."""

# CODATA 2018
HARTREE_IN_EV = 27.211386245988
HARTREE_IN_CM = 219474.6313632
AU_TIME_IN_FS = 0.024188843265857

ENERGY_UNITS = {
    "au": 1.0,
    "hartree": 1.0,
    "ev": 1.0 / HARTREE_IN_EV,
    "cm-1": 1.0 / HARTREE_IN_CM,
}


def energy_to_au(value, unit):
    """Convert an energy (scalar or array) from ``unit`` to Hartree."""
    try:
        factor = ENERGY_UNITS[unit.lower()]
    except KeyError:
        raise ValueError(f"unknown energy unit {unit!r}; expected one of eV, cm-1, au") from None
    return value * factor


def energy_from_au(value, unit):
    return value / ENERGY_UNITS[unit.lower()]


def fs_to_au(t_fs):
    return t_fs / AU_TIME_IN_FS


def au_to_fs(t_au):
    return t_au * AU_TIME_IN_FS
