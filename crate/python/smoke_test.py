"""Smoke test for the npmt_py extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/py
"""

import json

import npmt_py


def main():
    m = npmt_py.Structure.bundled("example")
    assert m.universe == [0, 1]
    e0 = m.initial_state()
    assert str(e0) == "([],[λ])"

    v1, e1 = m.query(e0, "R1", [0])
    v2, e2 = m.query(e1, "R1", [1])
    assert (v1, v2) == (1, 0)
    assert str(e2) == "([],[⟨(0),(1)⟩])"
    assert e0.leq(e2) and not e2.leq(e0)
    assert m.parse_state("([],[⟨(0),(1)⟩])") == e2
    assert len(m.futures(e0)) == 5

    em, report = m.satisfies(e0, "R1(0) | !R1(0)")
    assert not em, report
    nn, _ = m.satisfies(e0, "!!(R1(0) | !R1(0))")
    assert nn

    s = npmt_py.Session(m.spec())
    assert s.eval("R1(0)")[0] is False
    assert s.query("R1", [0]) == (1, 1, True)
    assert s.query("R1", [0]) == (1, 1, False)
    view = json.loads(s.view_json())
    assert view["watchlist"][0]["satisfied"] is True
    assert s.log() == [(1, "R1", [0], 1)]

    found = npmt_py.search("R(0) | !R(0)")
    assert found["outcome"] == "found" and found["verified"], found
    assert npmt_py.search("!!R(0) -> R(0)")["outcome"] == "exhausted"

    try:
        m.satisfies(e0, "R1(0")
    except ValueError as err:
        assert "syntax error" in str(err)
    else:
        raise AssertionError("expected a parse error")

    print("npmt_py smoke test passed")


if __name__ == "__main__":
    main()
