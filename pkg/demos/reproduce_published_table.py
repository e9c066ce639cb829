"""Recompute every GAP value in the bundled results table.

The package ships the 22-instance comparison table it was benchmarked
against. This recomputes the fulfillment gap from the raw baseline and
solver counts and checks the published column digit for digit.
"""

from mealdispatch import gap_percent, load_published_results


def main() -> None:
    rows = load_published_results()
    print(f"{'instance':>8}  {'orders':>7}  {'OF base':>8}  {'OF solver':>9}  "
          f"{'published':>9}  {'recomputed':>10}")
    exact = 0
    for row in rows:
        got = gap_percent(row.of_base, row.of_grasp)
        ok = abs(got - row.gap) <= 0.005
        exact += ok
        print(f"{row.instance:>8}  {row.orders:>7}  {row.of_base:>8}  {row.of_grasp:>9}  "
              f"{row.gap:>9.2f}  {got:>10.2f}{'' if ok else '  MISMATCH'}")
    print(f"\n{exact}/{len(rows)} rows reproduced within +/-0.005")


if __name__ == "__main__":
    main()
