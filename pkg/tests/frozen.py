"""Reference values computed once with ``oracle_mp.py`` (mpmath, 30 digits) and frozen."""

# theta(x; p) by direct product
THETA = [
    (0.3 + 0.2j, 0.2 + 0.1j, complex(0.22630983415823690789, -0.060282409250782)),
    (-1.7 + 0.4j, 0.45j, complex(1.9384618461209158378, 1.3212157071620803505)),
]

# [x] at p = 0.3, eta = 0.17 + 0.03i
BRACKET = (0.41 - 0.3j, 0.3, 0.17 + 0.03j, complex(-0.13557500185931415358, -0.19461670841216242627))

# det([x_i - y_j + t] / [x_i - y_j]) for n = 2 at p = 0.2, eta = 0.21 + 0.02i
FROBENIUS = dict(x=[0.2 + 0.1j, -0.3 + 0.05j], y=[0.1 - 0.2j, 0.45 + 0.1j], t=0.33 + 0.07j,
                 p=0.2, eta=0.21 + 0.02j, value=complex(1.0319574926433521248, -0.49192686653068110453))

# Z_n by literal state enumeration at the points oracle_mp.POINTS
PARTITION = {
    1: complex(-0.55275949494310836957, 0.73802196739376986479),
    2: complex(0.51965644270556136418, -0.088320971330780436325),
    3: complex(0.1644424380894719298, -0.01512482897228306357),
    4: complex(4.2406724665404592659, -4.3096067922830988573),
}
