import math

import numpy as np
import pytest

from lapmark import harness
from lapmark.harness import (
    Report,
    Strength,
    parse_attack_grid,
    parse_config,
    reference_alpha_for_psnr,
    run_attack_suite,
    run_ber_sweep,
    run_transparency_sweep,
)
from lapmark.imageio import write_pgm


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory, aerial):
    d = tmp_path_factory.mktemp("small")
    write_pgm(d / "top.pgm", aerial[:128, :128])
    write_pgm(d / "bottom.pgm", aerial[-128:, -128:])
    return d


def test_parse_config():
    cfg = parse_config("# comment\nalphas = 0.01, 0.02\n\nN-values=8000 # trailing\n")
    assert cfg == {"alphas": "0.01, 0.02", "n_values": "8000"}
    with pytest.raises(ValueError):
        parse_config("no equals sign")


def test_parse_attack_grid():
    assert parse_attack_grid("jpeg:75,95; auto-adjust") == [("jpeg", 75.0), ("jpeg", 95.0), ("auto-adjust", None)]
    with pytest.raises(ValueError):
        parse_attack_grid("blur:3")


def test_strength_parsing():
    assert Strength.parse("0.06") == Strength("alpha", 0.06)
    assert Strength.parse("psnr:33") == Strength("psnr", 33.0)
    assert Strength.parse("ref-psnr:33") == Strength("ref-psnr", 33.0)
    assert reference_alpha_for_psnr(45.04) == pytest.approx(0.01)
    assert reference_alpha_for_psnr(39.02) == pytest.approx(0.02, rel=0.01)


def test_transparency_rows(small_dataset):
    rep = run_transparency_sweep(small_dataset, [0.01, 0.05], [100, 500])
    assert rep.header == "metric,image,alpha,n,param,value"
    assert len(rep.rows) == 2 * 2 * 2 * 3
    for emp, ana in zip(rep.values("dwr"), rep.values("dwr_analytic")):
        assert abs(emp - ana) < 0.3
    assert not rep.errors


def test_empty_alpha_list(small_dataset):
    rep = run_transparency_sweep(small_dataset, [], [8000])
    assert rep.rows == [] and rep.to_csv() == "metric,image,alpha,n,param,value\n"


def test_unreadable_file_is_a_row_error(small_dataset, tmp_path, aerial):
    write_pgm(tmp_path / "good.pgm", aerial[:64, :64])
    (tmp_path / "bad.pgm").write_bytes(b"garbage")
    rep = run_transparency_sweep(tmp_path, [0.1], [50])
    assert len(rep.errors) == 1
    assert any(r[0] == "error" and r[1] == "bad" for r in rep.rows)
    assert len(rep.values("psnr", image="good")) == 1


def test_csv_is_reproducible_and_canonical(small_dataset):
    a = run_transparency_sweep(small_dataset, [0.02, 0.01], [200]).to_csv()
    b = run_transparency_sweep(small_dataset, [0.01, 0.02], [200], workers=2).to_csv()
    assert a == b
    assert "\r" not in a and a.endswith("\n")
    images = [line.split(",")[1] for line in a.splitlines()[1:]]
    assert images == sorted(images)


def test_ber_sweep_synthetic():
    rep = run_ber_sweep("synthetic", [0.0, 8.0], [0.06], [2000], 400, ("laplace-noisy", "gaussian"), seed=4)
    assert rep.header.endswith(",ci_low,ci_high")
    assert len(rep.rows) == 4
    for row in rep.rows:
        assert row[6] <= row[5] <= row[7]
    again = run_ber_sweep("synthetic", [8.0, 0.0], [0.06], [2000], 400, ("gaussian", "laplace-noisy"), seed=4)
    assert sorted(rep.rows) == sorted(again.rows)


def test_ber_sweep_reference_scale(aerial):
    assert harness.reference_scale(aerial) == pytest.approx(7.27, abs=0.05)
    rep = run_ber_sweep("synthetic", [4.0], [0.06], [500], 50, ("laplace-noisy",), reference_image=aerial)
    assert len(rep.rows) == 1


def test_ber_sweep_image(small_dataset):
    rep = run_ber_sweep("image", [20.0], [0.3], [1000], 2, ("laplace-clean", "laplace-noisy"),
                        dataset=small_dataset)
    assert {r[1] for r in rep.rows} == {"top", "bottom"}
    assert all(0 <= r[5] <= 1 for r in rep.rows)


def test_ber_sweep_rejects_bad_input():
    with pytest.raises(ValueError):
        run_ber_sweep("synthetic", [0.0], [0.06], [100], 0)
    with pytest.raises(ValueError):
        run_ber_sweep("hybrid", [0.0], [0.06], [100], 1)


def test_attack_suite_pixel_loss_trend(small_dataset):
    # losses where recovery is still clearly above chance on 128x128 crops
    grid = (0.001, 0.01, 0.05, 0.2)
    rep = run_attack_suite(small_dataset, 0.3, 500, "pixel-loss:" + ",".join(map(str, grid)), repeats=10)
    means = harness.dataset_means(rep, "recovery")
    assert means["none"] == 1.0
    seq = [means[f"pixel-loss={p:g}"] for p in grid]
    assert all(a >= b for a, b in zip(seq, seq[1:]))


def test_attack_suite_records_cell_failures(small_dataset, monkeypatch):
    def boom(cell):
        if cell[0] == "top":
            raise RuntimeError("codec exploded")
        return real(cell)

    real = harness._attack_cell
    monkeypatch.setattr(harness, "_attack_cell", boom)
    rep = run_attack_suite(small_dataset, 0.3, 500, "jpeg:90")
    assert len(rep.errors) == 1 and "codec exploded" in rep.errors[0]
    assert rep.values("ber", image="bottom")


def test_attack_suite_psnr_strength(small_dataset):
    rep = run_attack_suite(small_dataset, "psnr:40", 500, "brightness:1.1")
    alphas = {r[2] for r in rep.rows}
    assert len(alphas) == 2 and all(0 < a < 1 for a in alphas)


def test_report_csv_formats_missing_values():
    rep = Report("metric,image,alpha,n,param,value", [("error", "x", None, None, "oops", math.nan)])
    assert rep.to_csv().splitlines()[1] == "error,x,,,oops,nan"
