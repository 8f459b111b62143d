"""Hand oracle for the RGCN forward and head fixtures in test_rgcn.cpp.

Exact rational arithmetic up to the logits; the softmax is evaluated in
double precision. Run with python3 and paste the printed values.
"""
from fractions import Fraction as F
import math

SEQ, SEQ_INV, CAUSAL, CAUSAL_INV = range(4)


def mat(rows):
    return [[F(v) for v in r] for r in rows]


def vecmat(x, w):
    return [sum(x[i] * w[i][j] for i in range(len(x))) for j in range(len(w[0]))]


def relu(v):
    return [max(F(0), a) for a in v]


def relations(n, canonical):
    rel = [[] for _ in range(4)]
    for s, kind, d in canonical:
        fwd, inv = (CAUSAL, CAUSAL_INV) if kind == "C" else (SEQ, SEQ_INV)
        rel[fwd].append((s, d))
        rel[inv].append((d, s))
    return rel


def layer(h, rel, ws, wself):
    out = []
    for v in range(len(h)):
        acc = vecmat(h[v], wself)
        for r in range(4):
            incoming = [u for (u, t) in rel[r] if t == v]
            if not incoming:
                continue
            for u in incoming:
                m = vecmat(h[u], ws[r])
                acc = [a + b / len(incoming) for a, b in zip(acc, m)]
        out.append(relu(acc))
    return out


L0 = ([mat([[1, -1], [F(1, 2), 2]]), mat([[-1, F(1, 2)], [1, 1]]),
       mat([[2, 0], [-1, 1]]), mat([[0, 1], [1, -2]])],
      mat([[1, F(1, 2)], [F(-1, 2), 1]]))
L1 = ([mat([[F(1, 2), 1], [1, -1]]), mat([[1, 0], [0, 1]]),
       mat([[-1, 2], [F(1, 2), F(1, 2)]]), mat([[1, 1], [-1, F(1, 2)]])],
      mat([[F(1, 2), -1], [1, 1]]))


def forward(x, canonical):
    rel = relations(len(x), canonical)
    h = layer(x, rel, *L0)
    return layer(h, rel, *L1)


def show(name, rows):
    print(name)
    for r in rows:
        print("  ", ", ".join(repr(float(v)) for v in r), "   exact:", [str(v) for v in r])


x3 = mat([[1, 0], [0, 1], [1, 1]])
e3 = [(0, "C", 1), (1, "S", 2), (0, "S", 2)]
show("three-node output", forward(x3, e3))

x_on = mat([[1, 0], [0, 1], [1, 1], [F(1, 2), -1]])
e_on = [(0, "C", 1), (1, "S", 2), (2, "C", 3)]
x_kg = mat([[0, 1], [1, 0], [2, 0], [1, -1]])
e_kg = [(0, "S", 1), (0, "C", 2), (3, "S", 2)]

W0 = mat([[1, -1, F(1, 2)], [F(1, 2), 1, -1], [-1, F(1, 2), 1], [F(1, 4), -F(1, 2), 1]])
B0 = [F(1, 10), F(-1, 5), F(0)]
W1 = mat([[F(1, 10), F(-1, 20)], [-1, 1], [F(-1, 20), F(3, 20)]])
B1 = [F(1, 5), F(1, 10)]

h_on = forward(x_on, e_on)
h_kg = forward(x_kg, e_kg)
g_on = [max(r[j] for r in h_on) for j in range(2)]
g_kg = [max(r[j] for r in h_kg) for j in range(2)]
z0 = relu([a + b for a, b in zip(vecmat(g_on + g_kg, W0), B0)])
z1 = relu([a + b for a, b in zip(vecmat(z0, W1), B1)])
show("online readout", [g_on])
show("kg readout", [g_kg])
show("logits", [z1])
m = max(z1)
ex = [math.exp(float(v - m)) for v in z1]
s = sum(ex)
print("probs", [repr(v / s) for v in ex])
