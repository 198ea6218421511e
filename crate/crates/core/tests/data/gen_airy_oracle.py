"""Reference values for Ai and Ai' on [-20, 20] (401 points).

Maclaurin series evaluated in 160-digit arithmetic, cross-checked against
mpmath.airyai. Regenerate with: python3 gen_airy_oracle.py > airy_oracle.csv
"""
import mpmath as mp

mp.mp.dps = 160
C1 = 1 / (mp.power(3, mp.mpf(2) / 3) * mp.gamma(mp.mpf(2) / 3))
C2 = 1 / (mp.power(3, mp.mpf(1) / 3) * mp.gamma(mp.mpf(1) / 3))


def series(x):
    # Ai = C1 f - C2 g, f = sum x^{3k} prod (3j-2)/(3k)!, g = sum x^{3k+1} prod (3j-1)/(3k+1)!
    f = mp.mpf(1); g = x; tf = mp.mpf(1); tg = x
    fp = mp.mpf(0); gp = mp.mpf(1)
    k = 1
    x3 = x ** 3
    while True:
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        f += tf; g += tg
        fp += tf * 3 * k / x if x != 0 else 0
        gp += tg * (3 * k + 1) / x if x != 0 else 0
        if abs(tf) + abs(tg) < mp.mpf(10) ** (-150) and k > 5:
            break
        k += 1
    return C1 * f - C2 * g, C1 * fp - C2 * gp


print("x,ai,ai_prime")
for i in range(401):
    x = mp.mpf(-20) + mp.mpf(i) / 10
    ai, aip = series(x)
    ref = mp.airyai(x); refp = mp.airyai(x, derivative=1)
    assert abs(ai - ref) <= mp.mpf(10) ** (-40) * max(abs(ref), mp.mpf(10) ** (-40)), x
    assert abs(aip - refp) <= mp.mpf(10) ** (-40) * max(abs(refp), mp.mpf(10) ** (-40)), x
    print("%s,%s,%s" % (mp.nstr(x, 4), mp.nstr(ai, 20, min_fixed=0, max_fixed=0), mp.nstr(aip, 20, min_fixed=0, max_fixed=0)))
