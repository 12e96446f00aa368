"""
Published numerical constants for 2 <= t <= 10, kept as decimal strings.

Each value is printed with an error of at most one unit in its last digit;
``reference_interval`` turns a string into that tolerance window.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict

from canontree.utils.interval import Interval

# columns: q0, Q (radius ratio of the singularity-free region)
SINGULARITY = {
    2: ("0.5573678720139932", "0.7131795784312742"),
    3: ("0.5206401166257250", "0.6307447647757403"),
    4: ("0.5090030531391631", "0.5930691701039086"),
    5: ("0.5042116835293617", "0.5720078345052473"),
    6: ("0.5020339464245723", "0.559428931713329"),
    7: ("0.5009982119507272", "0.550735002693058"),
    8: ("0.5004941016343997", "0.544259198784997"),
    9: ("0.500245704703080", "0.539248917438516"),
    10: ("0.5001224896234884", "0.535257359027998"),
}

# height: mu_h, sigma2_h
HEIGHT = {
    2: ("0.5517980333242771", "0.3191028720021838"),
    3: ("0.5330219170893142", "0.2640876574238174"),
    4: ("0.5216130806307567", "0.2465933142213578"),
    5: ("0.5137644952434437", "0.2404182939877220"),
    6: ("0.5084950082062925", "0.2396633993742431"),
    7: ("0.5051047365215813", "0.2411570855092153"),
    8: ("0.5030001253275540", "0.2432575483836212"),
    9: ("0.5017308605343554", "0.2452173961787762"),
    10: ("0.5009832278618640", "0.2467757623911673"),
}

# distinct leaf depths: mu_d, sigma2_d
DEPTHS = {
    2: ("0.4151957394337730", "0.2449371766120133"),
    3: ("0.4869093777539261", "0.2893609775712220"),
    4: ("0.5024588321518999", "0.2741197923680785"),
    5: ("0.5050331956677906", "0.2607084483093273"),
    6: ("0.5043408269340902", "0.2530808413006747"),
    7: ("0.5030838633817897", "0.2495578056054622"),
    8: ("0.5020050053196332", "0.2483362931739359"),
    9: ("0.5012375070905982", "0.2482103208441571"),
    10: ("0.5007377066674932", "0.2485046286268308"),
}

# total path length: mu_tpl, sigma2_tpl
PATH_LENGTH = {
    2: ("0.5517980333242771", "0.4254704960029117"),
    3: ("0.7995328756339714", "0.7922629722714524"),
    4: ("1.0432261612615134", "1.3151643425139087"),
    5: ("1.2844112381086093", "2.0034857832310170"),
    6: ("1.5254850246188775", "2.8759607924909180"),
    7: ("1.7678665778255347", "3.9388990633171834"),
    8: ("2.0120005013102160", "5.1894943655172528"),
    9: ("2.2577888724045994", "6.6208696968269586"),
    10: ("2.5049161393093200", "8.2258587463722461"),
}

# width: mu_w
WIDTH = {
    2: "1.710776751014961",
    3: "0.7660531443158307",
    4: "0.4936068552417457",
    5: "0.3650919029615249",
    6: "0.2902388863790219",
    7: "0.2411430286905858",
    8: "0.2063933963643483",
    9: "0.1804647899046739",
    10: "0.1603561167643597",
}

# leaves on the last level: mu_m, sigma2_m
LAST_LEVEL = {
    2: ("3.3008907135661046", "3.4340283494347781"),
    3: ("5.4223250580971105", "10.9926467981432752"),
    4: ("7.5391743055684431", "23.0048877906448059"),
    5: ("9.6531072700455410", "39.9382006717564049"),
    6: ("11.7525465927985450", "61.9509728363450114"),
    7: ("13.8311837210749625", "88.8290211521323761"),
    8: ("15.8889617566427750", "120.2125697911546141"),
    9: ("17.9291240142580452", "155.7621950801096596"),
    10: ("19.9558689242933884", "195.2366537978909468"),
}


def reference_interval(text: str) -> Interval:
    """Interval [v - u, v + u] where u is one unit in the last printed digit."""
    value = Fraction(text)
    decimals = len(text.split(".", 1)[1]) if "." in text else 0
    unit = Fraction(1, 10 ** decimals)
    return Interval.hull_of([Interval.point(value - unit), Interval.point(value + unit)])


def published_values(t: int) -> Dict[str, str]:
    """All published constants for arity t, keyed by report field name."""
    if t not in SINGULARITY:
        return {}
    return {
        "q0": SINGULARITY[t][0],
        "mu_h": HEIGHT[t][0],
        "sigma2_h": HEIGHT[t][1],
        "mu_d": DEPTHS[t][0],
        "sigma2_d": DEPTHS[t][1],
        "mu_tpl": PATH_LENGTH[t][0],
        "sigma2_tpl": PATH_LENGTH[t][1],
        "mu_w": WIDTH[t],
        "mu_m": LAST_LEVEL[t][0],
        "sigma2_m": LAST_LEVEL[t][1],
    }


def region_ratio(t: int) -> Fraction:
    """Published Q for arity t; large t falls back to 1/2 + ln 2/(2t)."""
    if t in SINGULARITY:
        return Fraction(SINGULARITY[t][1])
    return Fraction(1, 2) + Fraction(0.6931471805599453) / (2 * t)
