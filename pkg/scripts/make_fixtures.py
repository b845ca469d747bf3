"""Regenerate the test fixture set under fixtures/.

Five synthetic countries:

    AA  Arcadia   model-generated 90-day history (known parameters), pyramid,
                  covariates with planted lag-5 correlations
    BB  Borealis  second calibratable country, different parameters
    CC  Caldera   reported via two provinces in cases.csv, no pyramid
    DD  Dunmore   metadata only, no history
    EE  Estuaria  short real-looking history with zero-death early days

cases.csv also carries two rows under the unknown code ZZ to exercise
the ingest validation report. All randomness is seeded so reruns are
byte-identical.
"""

import csv
import json
import math
import random
import sys
from datetime import date, timedelta
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from epiforge.calibration import synthesize_history
from epiforge.epi_model import AGE_BIN_WIDTH, AGE_CLASSES, AGE_FIRST_YEAR, CompartmentState, ModelParams

ROOT = Path(__file__).parent.parent / "fixtures"
START = date(2020, 1, 22)

AA_PARAMS = ModelParams(beta=0.25, lambda_r=0.08, lambda_d=0.02)
BB_PARAMS = ModelParams(beta=0.2, lambda_r=0.1, lambda_d=0.01)
AA_POP = 5_000_000
BB_POP = 2_000_000


def write_csv(path: Path, header: list[str] | None, rows: list[list]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        writer.writerows(rows)


def country_rows(code: str, params: ModelParams, population: float, days: int, seed_cases: int):
    initial = CompartmentState(population - seed_cases, seed_cases, 0, 0)
    history = synthesize_history(params, population, initial, days, country_code=code, start=START)
    rows = []
    for s in history:
        rows.append(
            [code, s.day.isoformat(), round(s.affected), round(s.dead), round(s.recovered)]
        )
    return rows, history


def province_rows(code: str, days: int, rng: random.Random):
    """Two provinces with hand-rolled noisy growth; province B misses one day."""
    rows = []
    conf = {"North": 30.0, "South": 50.0}
    dead = {"North": 0.0, "South": 1.0}
    rec = {"North": 2.0, "South": 5.0}
    skip_day = START + timedelta(days=7)
    for k in range(days):
        day = START + timedelta(days=k)
        for prov in ("North", "South"):
            conf[prov] *= 1.0 + rng.uniform(0.02, 0.12)
            dead[prov] += rng.uniform(0.0, 1.5)
            rec[prov] += conf[prov] * rng.uniform(0.005, 0.02)
            if prov == "South" and day == skip_day:
                continue
            rows.append(
                [
                    code,
                    day.isoformat(),
                    round(conf[prov]),
                    round(dead[prov]),
                    round(rec[prov]),
                    prov,
                ]
            )
    return rows


def covariate_rows(code: str, history, rng: random.Random, temp_base: float, hum_base: float):
    """Temperature tracks newly-affected five days ahead (positive), humidity
    the negative of it, so the lag-5 study has a planted signal."""
    new = [s.newly_affected for s in history]
    peak = max(max(new), 1.0)
    rows = []
    for k, s in enumerate(history):
        ahead = new[k + 5] if k + 5 < len(new) else new[-1]
        temp = temp_base + 12.0 * (ahead / peak) + rng.uniform(-0.4, 0.4)
        hum = hum_base - 25.0 * (ahead / peak) + rng.uniform(-0.8, 0.8)
        rows.append([code, s.day.isoformat(), f"{temp:.2f}", f"{hum:.2f}"])
    return rows


def pyramid_rows(population: float, decay: float):
    weights = [math.exp(-decay * k) for k in range(AGE_CLASSES)]
    total_w = sum(weights)
    rows = []
    for k in range(AGE_CLASSES):
        start = AGE_FIRST_YEAR + AGE_BIN_WIDTH * k
        rows.append([start, round(population * weights[k] / total_w)])
    return rows


def banded_matrix(rng: random.Random, diag: float, spread: float, band: int, active_rows=None):
    """Symmetric with a diagonal band; active_rows limits where mass sits."""
    m = [[0.0] * AGE_CLASSES for _ in range(AGE_CLASSES)]
    for i in range(AGE_CLASSES):
        for j in range(i, AGE_CLASSES):
            if active_rows is not None and (i not in active_rows or j not in active_rows):
                continue
            if abs(i - j) > band:
                continue
            v = (diag if i == j else spread) * rng.uniform(0.7, 1.3)
            m[i][j] = m[j][i] = v
    return m


def scale_to_row_sum(matrices: dict, target_total: float):
    """Scale all four matrices together so the mean row sum of their plain
    sum hits target_total; relative structure is preserved."""
    total = 0.0
    for i in range(AGE_CLASSES):
        total += sum(sum(m[i][j] for m in matrices.values()) for j in range(AGE_CLASSES))
    mean_row = total / AGE_CLASSES
    factor = target_total / mean_row
    return {
        name: [[v * factor for v in row] for row in m] for name, m in matrices.items()
    }


def main():
    rng = random.Random(20200529)

    aa_rows, aa_history = country_rows("AA", AA_PARAMS, AA_POP, 89, 100)
    bb_rows, bb_history = country_rows("BB", BB_PARAMS, BB_POP, 89, 50)
    cc_rows = province_rows("CC", 30, rng)

    ee_rows = []
    conf, dd, rc = 0.0, 0.0, 0.0
    for k in range(25):
        day = START + timedelta(days=k)
        conf += rng.uniform(0, 4) if k < 10 else rng.uniform(5, 40)
        if k >= 12:
            dd += rng.uniform(0, 1.2)
        if k >= 8:
            rc += rng.uniform(0, 6)
        ee_rows.append(["EE", day.isoformat(), round(conf), round(dd), round(rc)])

    zz_rows = [
        ["ZZ", START.isoformat(), 5, 0, 0],
        ["ZZ", (START + timedelta(days=1)).isoformat(), 9, 0, 1],
    ]

    cases_header = ["country_code", "date", "confirmed", "deaths", "recovered", "province"]
    all_rows = []
    for r in aa_rows + bb_rows + ee_rows + zz_rows:
        all_rows.append(r + [""])
    all_rows += cc_rows
    write_csv(ROOT / "cases.csv", cases_header, all_rows)

    cov_rows = covariate_rows("AA", aa_history, rng, 14.0, 78.0) + covariate_rows(
        "BB", bb_history, rng, 22.0, 65.0
    )
    write_csv(ROOT / "covariates.csv", ["country_code", "date", "temperature_c", "humidity_pct"], cov_rows)

    write_csv(
        ROOT / "countries.csv",
        [
            "country_code",
            "name",
            "area",
            "population",
            "gdp",
            "literacy",
            "mean_temperature",
            "mean_rainfall",
            "mean_humidity",
            "pollution_index",
            "healthcare_index",
            "food_security_index",
            "hospital_beds_per_10m",
            "population_tests",
        ],
        [
            ["AA", "Arcadia", 3200, AA_POP, 41000, 99.1, 11.5, 640, 71, 42.3, 74.8, 81.2, 28500, 812000],
            ["BB", "Borealis", 1450, BB_POP, 28000, 97.4, 4.2, 420, 66, 35.1, 70.2, 77.9, 19200, 340000],
            ["CC", "Caldera", 780, 900000, 12000, 88.6, 24.8, 1550, "", 58.7, 55.3, 62.0, 8100, ""],
            ["DD", "Dunmore", 510, 650000, "", 91.2, 9.6, 880, 74, "", 61.5, "", 9900, 71000],
            ["EE", "Estuaria", 2100, 1400000, 9500, 83.9, 27.3, 1900, 81, 61.2, 49.8, 58.4, 7400, 96000],
        ],
    )

    for code, pop, decay in (("AA", AA_POP, 0.035), ("BB", BB_POP, 0.05)):
        write_csv(ROOT / "pyramids" / f"{code}.csv", ["age_bin_start", "population"], pyramid_rows(pop, decay))

    young = set(range(0, 5))
    working = set(range(4, 13))
    mats = {
        "home": banded_matrix(rng, 0.5, 0.25, 3),
        "school": banded_matrix(rng, 0.9, 0.45, 1, active_rows=young),
        "work": banded_matrix(rng, 0.55, 0.3, 4, active_rows=working),
        "other": banded_matrix(rng, 0.3, 0.2, 6),
    }
    mats = scale_to_row_sum(mats, 1.25)
    for name, m in mats.items():
        write_csv(
            ROOT / "contact_matrices" / f"{name}.csv",
            None,
            [[f"{v:.6f}" for v in row] for row in m],
        )

    latest_aa = aa_history[-1]
    latest_bb = bb_history[-1]
    live = {
        "as_of": "2020-05-29T12:00:00Z",
        "global": {
            "affected": round(latest_aa.affected + latest_bb.affected + 131000),
            "dead": round(latest_aa.dead + latest_bb.dead + 5200),
            "recovered": round(latest_aa.recovered + latest_bb.recovered + 61000),
        },
        "countries": {
            "AA": {
                "affected": round(latest_aa.affected * 1.01),
                "dead": round(latest_aa.dead * 1.01),
                "recovered": round(latest_aa.recovered * 1.01),
            },
            "BB": {
                "affected": round(latest_bb.affected * 1.02),
                "dead": round(latest_bb.dead * 1.02),
                "recovered": round(latest_bb.recovered * 1.02),
            },
            "EE": {"affected": 460, "dead": 11, "recovered": 150},
        },
    }
    with open(ROOT / "live.json", "w") as fh:
        json.dump(live, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"fixtures written under {ROOT}")


if __name__ == "__main__":
    main()
