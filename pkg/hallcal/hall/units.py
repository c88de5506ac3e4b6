AIR_DENSITY = 1.205  # kg/m^3 at 20 degC
AIR_SPECIFIC_HEAT = 1005.0  # J/(kg K)
CFM_TO_M3S = 0.3048 ** 3 / 60.0


def rise_constant(density: float = AIR_DENSITY,
                  specific_heat: float = AIR_SPECIFIC_HEAT) -> float:
    """
    Temperature rise of air carrying one watt per cfm, in degC*(cfm/W).

    A server dissipating P watts through alpha*P cfm heats its air stream by
    rise_constant() / alpha degrees.
    """
    return 1.0 / (density * specific_heat * CFM_TO_M3S)


RISE_CONSTANT = rise_constant()
