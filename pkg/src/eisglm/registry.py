"""Built-in methods, coefficients transcribed to the printed 15 decimals.

Where only one row of ``D`` is printed, every row is that same row
(``D`` is rank one with unit row sums).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .tableau import Family, Kind, MethodTableau


def _rank_one(row):
    row = np.asarray(row, dtype=float)
    return np.tile(row, (row.size, 1))


def _lower(s, entries):
    m = np.zeros((s, s))
    for (i, j), v in entries.items():
        m[i - 1, j - 1] = v
    return m


def _build():
    out = []

    out.append(MethodTableau(
        name="eEIS(2,3)_2",
        D=_rank_one([1.347635863512091, -0.347635863512091]),
        A=[[1.110588320380528, 0.206278390370703],
           [1.160801319467423, 0.191968442856969]],
        Ahat=[[0.376508598017949, 0.079881117612918],
              [0.424704932282709, 0.083778591655645]],
        R=_lower(2, {(2, 1): 0.875587228946215}),
        Rhat=_lower(2, {(2, 1): 0.412259887079832}),
        p=2, P=3, kind=Kind.EIS, family=Family.EXPLICIT,
    ))

    out.append(MethodTableau(
        name="eEIS+(2,5)_2",
        D=_rank_one([0.500023658051142, 0.499976341948858]),
        A=[[0.627069692131650, 0.151022064558538],
           [0.709712162750524, 0.848963643214302]],
        Ahat=[[0.058142153689242, 0.325582994094698],
              [0.108273930132603, 0.477624731406111]],
        R=_lower(2, {(2, 1): -0.336746561995068}),
        Rhat=_lower(2, {(2, 1): 0.367133756538675}),
        p=3, P=5, kind=Kind.EIS_PLUS, family=Family.EXPLICIT,
        stored_tau=[-0.039533847641586, 0.039537588993770],
    ))

    out.append(MethodTableau(
        name="eEIS+(2,6)_2",
        D=_rank_one([0.193021555206000, 0.806978444794000]),
        A=[[1.089589263420254, -0.469532861646008],
           [1.011690204056872, 1.112307786855907]],
        Ahat=[[0.196914195858807, 0.434709438834146],
              [0.130811273979010, 0.871687677021200]],
        R=_lower(2, {(2, 1): -1.033119102271808}),
        Rhat=_lower(2, {(2, 1): 0.499137031946415}),
        p=4, P=6, kind=Kind.EIS_PLUS, family=Family.EXPLICIT,
        stored_tau=[-0.037857689452761, 0.009055198613815],
    ))

    out.append(MethodTableau(
        name="eEIS+(3,7)_2",
        D=_rank_one([1.581021525561460, -0.598751979308602, 0.017730453747142]),
        A=[[0.931591460185742, 0.379244369981835, -0.172141957956410],
           [0.938547162180577, 0.508131122095280, -0.363857858559788],
           [0.504648760586788, 1.046850936001111, -0.659275924405796]],
        Ahat=[[0.057154143906362, 0.302522642478094, 0.175689200743141],
              [0.045099335357263, 0.359020777972142, 0.164798140168151],
              [-0.060217523878309, 0.456569929293375, -0.005615338892051]],
        R=_lower(3, {(2, 1): 0.307438691150295,
                     (3, 1): 1.789973573982305, (3, 2): -0.870575633439973}),
        Rhat=_lower(3, {(2, 1): 0.038804362951013,
                        (3, 1): 0.227157707727078, (3, 2): 0.276283023303938}),
        p=5, P=7, kind=Kind.EIS_PLUS, family=Family.EXPLICIT,
        stored_tau=[-0.003599790543666, -0.012406980352919, -0.097987210664809],
    ))

    out.append(MethodTableau(
        name="eEIS+(4,8)_2",
        D=_rank_one([1.126765222628176, 0.808129178515260,
                     -0.107647150078402, -0.827247251065033]),
        A=[[0.567574025309926, 0.723999455772069, 0.208196137734782, 0.023532165559543],
           [0.749691669482323, 0.430151531239573, 0.359568096205409, -0.030974711893773],
           [0.602555996794216, 0.745759221902972, 0.048559187429251, -0.267889537378177],
           [1.051588361923041, -0.047355340428569, 0.863960642835203, 0.214102220881218]],
        Ahat=[[0.041975696597772, 0.205746598967380, 0.137652258393657, 0.039122406247340],
              [0.064927843091523, 0.213465637934016, 0.160720650985361, -0.047428374982532],
              [0.056975020786010, 0.171669459177575, 0.226994033551341, -0.021617692260293],
              [0.095018403341495, 0.263066907087928, 0.147903147440657, -0.036525606967693]],
        R=_lower(4, {(2, 1): 0.296825313241825,
                     (3, 1): 0.379857836431130, (3, 2): 0.610459020171445,
                     (4, 1): 0.079086170545983, (4, 2): 0.114409044614819,
                     (4, 3): 0.077980998192235}),
        Rhat=_lower(4, {(2, 1): 0.095598816350501,
                        (3, 1): -0.143446089841412, (3, 2): 0.076113483149991,
                        (4, 1): 0.309290513515929, (4, 2): 0.063106409144583,
                        (4, 3): 0.076129207423402}),
        p=6, P=8, kind=Kind.EIS_PLUS, family=Family.EXPLICIT,
        stored_tau=[-0.000997109517747, -0.006485724807936,
                    -0.023117224006582, -0.004685791946531],
    ))

    out.append(MethodTableau(
        name="eSSP-EIS(2,3)_2",
        D=np.array([[7, 9], [7, 9]]) / 16,
        A=np.array([[2, 3], [2, 3]]) / 8,
        Ahat=np.array([[0, 1], [0, 1]]) / 8,
        R=_lower(2, {(2, 1): 2 / 3}),
        Rhat=_lower(2, {(2, 1): 2 / 9}),
        p=2, P=3, kind=Kind.EIS, family=Family.EXPLICIT_SSP,
        ssp_coefficient=1.5,
    ))

    out.append(MethodTableau(
        name="eSSP-EIS+(2,4)_2",
        D=[[0.435605756635718, 0.564394243364282],
           [0.435605756635718, 0.564394243364282]],
        A=[[0.232303428413552, 0.564394243364282],
           [0.216263460427852, 0.564394243364282]],
        Ahat=[[0.000000005124887, 0.260081562620613],
              [0.000000001928255, 0.146835746492061]],
        R=_lower(2, {(2, 1): 0.376253295127924}),
        Rhat=_lower(2, {(2, 1): 0.162082671864920}),
        p=2, P=4, kind=Kind.EIS_PLUS, family=Family.EXPLICIT_SSP,
        ssp_coefficient=1.0,
        stored_tau=[-0.063938362828511, 0.049348339827035],
    ))

    out.append(MethodTableau(
        name="eSSP-EIS+(3,6)_2",
        D=_rank_one([0.235787420033905, 0.332249926343388, 0.431962653622707]),
        A=[[0.179040619183497, 0.0, 0.400647796399945],
           [0.147616987633695, 0.118289307755180, 0.400647796399945],
           [0.194101834261448, 0.212027154638658, 0.400647796399945]],
        Ahat=[[0.032860477842919, 0.0, 0.068024553668439],
              [0.024965463148830, 0.034155124171981, 0.021087452933654],
              [0.011487692416560, 0.092903917927740, 0.124915188800131]],
        R=_lower(3, {(2, 1): 0.287524583705647,
                     (3, 1): 0.214948333287866, (3, 2): 0.243023557774243}),
        Rhat=_lower(3, {(2, 1): 0.133340336145235,
                        (3, 1): 0.050250968106130, (3, 2): 0.112702859933545}),
        p=4, P=6, kind=Kind.EIS_PLUS, family=Family.EXPLICIT_SSP,
        ssp_coefficient=1.0782,
        stored_tau=[-0.010752778908703, -0.021534888908005, 0.022433270953649],
    ))

    out.append(MethodTableau(
        name="iEIS+(2,4)_2",
        D=_rank_one([0.594710614896760, 0.405289385103240]),
        A=[[-2.187376304427630, -0.964459220078949],
           [-1.117865907067007, 2.067845436796621]],
        Ahat=[[0.778080609332642, -1.088765766927099],
              [-2.898999040140121, 1.440243113199464]],
        R=np.diag([3.949190831954959, 0.347375777718766]),
        Rhat=np.diag([-2.706937237458932, 0.978108368826293]),
        p=2, P=4, kind=Kind.EIS_PLUS, family=Family.IMPLICIT,
        stored_tau=[-3.111010490530440, 4.565012136457357],
    ))

    out.append(MethodTableau(
        name="iEIS+(3,5)_2",
        D=[[0.439087264857344, 0.700945256500558, -0.140032521357901],
           [0.439087264857344, 0.700945256500558, -0.140032521357901],
           [0.439087264857344, 0.700945256500558, -0.140032521357901]],
        A=[[2.507826539020301, 3.279683213077780, -1.170881137598611],
           [-0.334032190141782, -4.031402321497854, 0.685583668720811],
           [-1.750770284075905, -4.999999998880823, 3.295317723260540]],
        Ahat=[[2.333968082671988, 0.419378200972933, -2.408406401605122],
              [-2.145600247202041, 0.897829295036851, -0.721006948644857],
              [-4.988816152192916, 3.020756581381562, -1.533772624102988]],
        R=np.diag([-3.756922019094389, 4.872890771657239, 4.981825821767937]),
        Rhat=np.diag([3.591518759368352, -2.760598976218027, -3.950356833416136]),
        p=3, P=5, kind=Kind.EIS_PLUS, family=Family.IMPLICIT,
        stored_tau=[3.466008686399261, -4.575755330149971, -12.036302018622621],
    ))
    return tuple(out)


@lru_cache(maxsize=1)
def _registry():
    return _build()


def registry() -> list[MethodTableau]:
    """All built-in methods, in presentation order."""
    return list(_registry())


def get_method(name: str) -> MethodTableau:
    for t in _registry():
        if t.name == name:
            return t
    # tolerate the subscript written without the underscore, e.g. "eEIS+(3,7)2"
    for t in _registry():
        if t.name.replace("_", "") == name.replace("_", ""):
            return t
    raise KeyError(f"unknown method {name!r}; known: {', '.join(t.name for t in _registry())}")


#: Default post-processing window per method (m * s >= p + 3).
DEFAULT_WINDOW = {
    "eEIS+(2,5)_2": 3,
    "eEIS+(2,6)_2": 4,
    "eEIS+(3,7)_2": 3,
    "eEIS+(4,8)_2": 3,
    "eSSP-EIS+(2,4)_2": 3,
    "eSSP-EIS+(3,6)_2": 3,
    "iEIS+(2,4)_2": 3,
    "iEIS+(3,5)_2": 3,
}


def default_window(tableau: MethodTableau) -> int:
    if tableau.name in DEFAULT_WINDOW:
        return DEFAULT_WINDOW[tableau.name]
    m = 1
    while m * tableau.s < tableau.p + 3:
        m += 1
    return max(m, 3)
