#!/usr/bin/env python3
"""Smoke test for the otplab_py extension module.

Build and place the module first:

    cargo build -p otplab-py --release
    cp target/release/libotplab_py.so python/otplab_py.so

Then run: python3 python/smoke_test.py
"""

import json
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import otplab_py as lab


def main() -> None:
    # Class enumeration.
    assert lab.class_size(2) == 8
    assert lab.class_size(4) == 96
    assert lab.cantor_class_size(2) == 2

    # Hypothesis evaluation: secret C = A xor B decides the label.
    h = lab.Hypothesis("0011", "0101")
    assert h.secret == "0110"
    assert h.evaluate(0) == (0, "0011")
    assert h.evaluate(1) == (1, "0101")
    assert h.evaluate(5) == (1, "0101")  # 5 mod 4 = 1

    # Regularizers and their induced learners.
    psi = lab.Regularizer.builtin("random", 4, seed=0)
    assert psi.locally_injective
    round_trip = lab.Regularizer.from_json(psi.to_json())
    assert round_trip.to_json() == psi.to_json()

    constant = lab.Regularizer.builtin("constant", 4, seed=0)
    assert not constant.locally_injective
    assert constant.completed().locally_injective

    # Two distinct labels pin the hypothesis exactly.
    prediction = psi.predict([(0, (0, "0011")), (1, (1, "0101"))], 3)
    assert prediction == h.evaluate(3)

    # The adversarial lower bound, exhaustively at d = 2.
    report = json.loads(lab.run_adversary(2, psi, mode="exhaustive"))
    assert report["draws"] == 384
    mean = Fraction(*map(int, report["mean"].split("/")))
    assert mean >= Fraction(1, 4), mean

    # Supporting facts.
    assert lab.uniformity_holds(2, 1)
    assert lab.ds_dimension(2, [0, 1, 2, 3], 3) == 1
    assert lab.baseline_error([0, 1, 2, 3], "000000", "000111") == "1/4"

    # Secret sharing.
    s1, s2 = lab.otp_split("0110", seed=1)
    assert lab.otp_combine(s1, s2) == "0110"
    shares = lab.shamir_split(3, 2, 3, 7, seed=0)
    assert lab.shamir_combine(shares[:2], 2, 7) == 3
    assert lab.shamir_secrecy_holds(2, 3, 7)

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
