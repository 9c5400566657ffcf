"""coxstab command line: family input, checks, homology, stability reports.

Reports are emitted as JSON (machine) on stdout or --out, with an aligned
text summary and timing on stderr.  Report bytes contain no timestamps, so
identical configurations produce identical outputs.  Exit codes: 0 all
requested checks pass, 1 check failure, 2 usage error, 3 cap or budget
exceeded.
"""
from __future__ import annotations

import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import basic, complexes, diagrams, engine, semisimplicial, stability
from .errors import BudgetExceeded, CapExceeded, CoxstabError, DiagramError, ReductionBoundExceeded
from .homology import check_weakly_cm, simplicial_homology
from .report import SCHEMA_VERSION, Report

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def worker_count():
    raw = os.environ.get("COXSTAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def load_family(source):
    """--family values: A, B, D, I:<m>, or file:<path> (grammar or JSON)."""
    if source.startswith("file:"):
        path = Path(source[5:])
        if not path.exists():
            raise click.UsageError(f"family file not found: {path}")
        try:
            diagram = diagrams.parse_diagram(path.read_text())
            return diagrams.FamilySpec(diagram, None)
        except DiagramError as exc:
            raise click.UsageError(f"bad family file: {exc}") from None
    try:
        return diagrams.builtin_family(source)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def emit(doc, out, human_lines, started):
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)
    for line in human_lines:
        click.echo(line, err=True)
    click.echo(f"elapsed: {time.perf_counter() - started:.2f}s", err=True)


def finish(reports, out, started, extra=None):
    reports = reports if isinstance(reports, list) else [reports]
    doc = {
        "schema": SCHEMA_VERSION,
        "reports": [r.as_dict() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    if extra:
        doc.update(extra)
    lines = []
    for r in reports:
        lines.extend(r.text_lines())
    emit(doc, out, lines, started)
    sys.exit(EXIT_OK if doc["passed"] else EXIT_CHECK_FAILED)


def run_guarded(fn):
    try:
        return fn()
    except (CapExceeded, BudgetExceeded, ReductionBoundExceeded) as exc:
        doc = {"schema": SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc)}
        click.echo(json.dumps(doc, indent=2))
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_BUDGET)


@click.group()
def main():
    """Exact desk-scale computations with Coxeter coset complexes."""


family_option = click.option("--family", required=True, help="A | B | D | I:<m> | file:<path>")
n_option = click.option("--n", "n", required=True, type=int)
cap_option = click.option("--cap", type=int, default=None, help="enumeration cap")
out_option = click.option("--out", type=click.Path(), default=None)
figures_option = click.option("--no-figures", is_flag=True, help="skip matplotlib output")


@main.command("enumerate")
@family_option
@n_option
@cap_option
@out_option
def enumerate_cmd(family, n, cap, out):
    """Enumerate W_n and report its order and length profile."""
    started = time.perf_counter()
    spec = load_family(family)

    def work():
        system = engine.family_system(spec, n)
        et = system.elements(cap or engine.DEFAULT_GROUP_CAP)
        report = Report("enumerate", {"family": spec.name(), "n": n, "cap": cap})
        report.add("enumerated", True, detail=f"order {et.order}")
        report.data["order"] = et.order
        report.data["length_generating_function"] = et.length_generating_function()
        return report

    report = run_guarded(work)
    finish(report, out, started)


@main.command("cosets")
@family_option
@n_option
@cap_option
@click.option("--drop-top", is_flag=True, help="J = S_{n-1}: drop the top chain generator")
@click.option("--subgroup", default=None, help="comma-separated generator names for J")
@out_option
def cosets_cmd(family, n, cap, drop_top, subgroup, out):
    """Coset table of W_n/W_J."""
    started = time.perf_counter()
    spec = load_family(family)
    if not drop_top and subgroup is None:
        raise click.UsageError("need --drop-top or --subgroup")

    def work():
        system = engine.family_system(spec, n)
        if drop_top:
            J = system.S(n - 1)
        else:
            names = [s for s in subgroup.split(",") if s]
            J = frozenset(system.gen_index(name) for name in names)
        table = system.coset_table(J, cap or engine.DEFAULT_COSET_CAP)
        report = Report(
            "cosets",
            {"family": spec.name(), "n": n, "J": sorted(system.gen_name(g) for g in J)},
        )
        report.add("enumerated", True, detail=f"index {len(table)}")
        report.data["index"] = len(table)
        report.data["representatives"] = ["*".join(map(str, table.representative(c).names())) or "e"
                                          for c in range(len(table))]
        return report

    report = run_guarded(work)
    finish(report, out, started)


@main.group("complex")
def complex_group():
    """Coset complex commands."""


@complex_group.command("build")
@family_option
@n_option
@cap_option
@click.option("--out", type=click.Path(), required=True)
def complex_build(family, n, cap, out):
    """Write C^n with its action to a JSON document."""
    started = time.perf_counter()
    spec = load_family(family)

    def work():
        cn = complexes.build_Cn(spec, n, cap or engine.DEFAULT_GROUP_CAP)
        doc = {
            "schema": SCHEMA_VERSION,
            "family": spec.name(),
            "n": n,
            "vertices": cn.complex.vertex_count,
            "simplices": {
                str(k): [list(s) for s in level]
                for k, level in enumerate(cn.complex.by_dim)
            },
            "generators": list(cn.system.gens),
            "action": [[int(v) for v in cn.action.perms[g]] for g in range(cn.system.ngens)],
        }
        return doc

    doc = run_guarded(work)
    Path(out).write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"wrote {out}", err=True)
    click.echo(f"elapsed: {time.perf_counter() - started:.2f}s", err=True)
    sys.exit(EXIT_OK)


def _parse_coeff(coeff):
    coeff = coeff.lower()
    if coeff == "z":
        return "Z"
    if coeff.startswith("f"):
        try:
            p = int(coeff[1:])
        except ValueError:
            raise click.UsageError(f"bad coefficient field {coeff!r}") from None
        if p < 2 or p >= 2**16 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise click.UsageError(f"coefficient field needs a prime < 2^16, got {p}")
        return f"F{p}"
    raise click.UsageError(f"unknown coefficients {coeff!r} (use z, f2, f<p>)")


@main.command("homology")
@click.option("--in", "infile", type=click.Path(), required=True)
@click.option("--coeff", default="z", help="z | f2 | f<p>")
@click.option("--reduced", is_flag=True)
@out_option
def homology_cmd(infile, coeff, reduced, out):
    """Homology of a stored complex."""
    started = time.perf_counter()
    path = Path(infile)
    if not path.exists():
        raise click.UsageError(f"input not found: {infile}")
    ring = _parse_coeff(coeff)
    try:
        doc = json.loads(path.read_text())
        simplices = [s for level in doc["simplices"].values() for s in level]
        complex_ = complexes.SimplicialComplex(doc["vertices"], simplices)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad complex document: {exc}") from None
    table = simplicial_homology(complex_, ring, reduced=reduced)
    report = Report("homology", {"in": str(infile), "coeff": ring, "reduced": reduced})
    report.add("computed", True)
    report.data["table"] = table.as_dict()
    finish(report, out, started)


@main.group("dn")
def dn_group():
    """Semisimplicial set commands."""


@dn_group.command("build")
@family_option
@n_option
@cap_option
@click.option("--out", type=click.Path(), required=True)
def dn_build(family, n, cap, out):
    """Write the coset semisimplicial set to a JSON document."""
    started = time.perf_counter()
    spec = load_family(family)

    def work():
        dn = semisimplicial.build_Dn(spec, n, cap or engine.DEFAULT_GROUP_CAP)
        return {
            "schema": SCHEMA_VERSION,
            "family": spec.name(),
            "n": n,
            "levels": dn.level_sizes,
            "faces": {f"{k},{i}": arr.tolist() for (k, i), arr in sorted(dn.faces.items())},
            "face_identity": dn.holds_identity(),
        }

    doc = run_guarded(work)
    Path(out).write_text(json.dumps(doc, indent=2) + "\n")
    click.echo(f"wrote {out}", err=True)
    click.echo(f"elapsed: {time.perf_counter() - started:.2f}s", err=True)
    sys.exit(EXIT_OK)


CHECKS = (
    "s3",
    "links",
    "transitivity",
    "lifts",
    "stabilizers",
    "basic",
    "cm",
    "phi",
    "dn-connectivity",
    "all",
)


def run_check(target, spec, n, cap, exhaustive=False):
    cap = cap or engine.DEFAULT_GROUP_CAP
    if target == "s3":
        return [engine.check_section3(spec, n, cap)]
    if target == "links":
        return [complexes.check_link_iso(spec, n, cap, exhaustive=exhaustive)]
    if target == "transitivity":
        return [complexes.check_transitivity(spec, n, cap)]
    if target == "lifts":
        return [complexes.check_lift_consistency(spec, n, cap)]
    if target == "stabilizers":
        return [complexes.check_stabilizers(spec, n, cap)]
    if target == "basic":
        return [
            basic.check_basic_properties(spec, n, cap),
            basic.check_chamber_filtration(spec, n, cap),
            basic.check_sd_iso(spec, n, cap),
        ]
    if target == "cm":
        return [check_weakly_cm(spec, n, cap)]
    if target == "phi":
        return [semisimplicial.check_phi_iso(spec, n, cap)]
    if target == "dn-connectivity":
        return [semisimplicial.check_dn_connectivity(spec, n, cap)]
    if target == "all":
        reports = []
        for sub in ("s3", "transitivity", "lifts", "links", "stabilizers",
                    "basic", "cm", "phi", "dn-connectivity"):
            reports.extend(run_check(sub, spec, n, cap))
        return reports
    raise click.UsageError(f"unknown check {target!r} (choose from {', '.join(CHECKS)})")


@main.command("check")
@click.argument("target", type=click.Choice(CHECKS))
@family_option
@n_option
@cap_option
@click.option("--trace", is_flag=True, help="write the filtration trace CSV")
@click.option("--all", "exhaustive", is_flag=True,
              help="check every simplex rather than orbit representatives")
@out_option
@figures_option
def check_cmd(target, family, n, cap, trace, exhaustive, out, no_figures):
    """Run a verification family (or all of them) for one (family, n)."""
    started = time.perf_counter()
    spec = load_family(family)
    reports = run_guarded(lambda: run_check(target, spec, n, cap, exhaustive))

    if trace and target in ("basic", "all"):
        trace_rows = next(
            (r.data["trace"] for r in reports if "trace" in r.data), None
        )
        if trace_rows is not None:
            stem = Path(out).with_suffix("") if out else Path(f"filtration-{spec.name()}-{n}")
            csv_path = stem.with_suffix(".csv")
            with open(csv_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["m", "element", "in_size", "type", "attachment_betti"])
                for row in trace_rows:
                    writer.writerow(
                        [row["m"], row["element"], row["in_size"], row["type"],
                         " ".join(map(str, row["attachment_betti"]))]
                    )
            click.echo(f"wrote {csv_path}", err=True)
            if not no_figures:
                from . import figures

                png = stem.with_suffix(".png")
                figures.render_filtration_trace(trace_rows, n, png)
                click.echo(f"wrote {png}", err=True)

    finish(reports, out, started)


@main.group("stability")
def stability_group():
    """Stability table and spectral-sequence commands."""


@stability_group.command("table")
@family_option
@click.option("--nmax", required=True, type=int)
@click.option("--coeff", default="f2")
@click.option("--maxdeg", type=int, default=2)
@click.option("--budget", type=int, default=None)
@click.option("--out", type=click.Path(), required=True)
@figures_option
def stability_table(family, nmax, coeff, maxdeg, budget, out, no_figures):
    """Fill the stability table and write it as CSV (plus a figure)."""
    started = time.perf_counter()
    spec = load_family(family)
    if _parse_coeff(coeff) != "F2":
        raise click.UsageError("the stability table is computed over f2")

    def work():
        return stability.verify_main_theorem(
            spec, nmax, maxdeg=maxdeg, budget=budget or stability.DEFAULT_BUDGET
        )

    table = run_guarded(work)
    with open(out, "w", newline="") as fh:
        csv.writer(fh).writerows(table.csv_rows())
    click.echo(f"wrote {out}", err=True)
    if not no_figures:
        from . import figures

        png = Path(out).with_suffix(".png")
        figures.render_stability_table(table, png)
        click.echo(f"wrote {png}", err=True)

    report = Report("stability.table", {"family": spec.name(), "nmax": nmax, "maxdeg": maxdeg})
    report.add("main-theorem-in-range", table.main_theorem_holds())
    for n, rep in getattr(table, "lemma83", {}).items():
        report.add(f"lemma83-n{n}", rep.passed)
    click.echo(report.to_json())
    for line in report.text_lines():
        click.echo(line, err=True)
    click.echo(f"elapsed: {time.perf_counter() - started:.2f}s", err=True)
    sys.exit(EXIT_OK if report.passed else EXIT_CHECK_FAILED)


@stability_group.command("ss")
@family_option
@n_option
@click.option("--maxdeg", type=int, default=2)
@click.option("--budget", type=int, default=None)
@out_option
@figures_option
def stability_ss(family, n, maxdeg, budget, out, no_figures):
    """E^1 page with d^1 ranks as JSON (plus a figure when --out is given)."""
    started = time.perf_counter()
    spec = load_family(family)

    def work():
        return stability.borel_spectral_sequence(
            spec, n, maxdeg=maxdeg, budget=budget or stability.DEFAULT_BUDGET
        )

    page, report = run_guarded(work)
    if out and not no_figures:
        from . import figures

        png = Path(out).with_suffix(".png")
        figures.render_ss_page(page, png)
        click.echo(f"wrote {png}", err=True)
    finish(report, out, started)


@main.command("campaign")
@click.option("--config", type=click.Path(), required=True)
@click.option("--out-dir", type=click.Path(), default="campaign-out")
@figures_option
def campaign_cmd(config, out_dir, no_figures):
    """Run a list of jobs from a config file and emit CSV summaries."""
    started = time.perf_counter()
    path = Path(config)
    if not path.exists():
        raise click.UsageError(f"config not found: {config}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"bad config: {exc}") from None
    jobs = doc.get("jobs", [])
    outdir = Path(out_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    def run_job(index, job):
        kind = job.get("kind", "check")
        row = {
            "index": index,
            "kind": kind if kind != "check" else f"check:{job.get('check', 'all')}",
            "family": job.get("family", ""),
            "n": job.get("n", job.get("nmax", "")),
            "status": "pass",
            "detail": "",
        }
        try:
            spec = load_family(job["family"]) if "family" in job else None
            if kind == "check":
                reports = run_check(job.get("check", "all"), spec, job["n"], job.get("cap"))
                if not all(r.passed for r in reports):
                    row["status"] = "fail"
                    row["detail"] = "; ".join(
                        item.name for r in reports for item in r.failures
                    )
            elif kind == "enumerate":
                system = engine.family_system(spec, job["n"])
                et = system.elements(job.get("cap", engine.DEFAULT_GROUP_CAP))
                row["detail"] = f"order {et.order}"
            elif kind == "cosets":
                system = engine.family_system(spec, job["n"])
                table = system.coset_table(
                    system.S(job["n"] - 1), job.get("cap", engine.DEFAULT_COSET_CAP)
                )
                row["detail"] = f"index {len(table)}"
            elif kind == "stability-table":
                table = stability.verify_main_theorem(
                    spec,
                    job["nmax"],
                    maxdeg=job.get("maxdeg", 2),
                    budget=job.get("budget", stability.DEFAULT_BUDGET),
                )
                name = f"stability-{spec.name()}-{job['nmax']}.csv"
                with open(outdir / name, "w", newline="") as fh:
                    csv.writer(fh).writerows(table.csv_rows())
                row["detail"] = name
                if not table.main_theorem_holds():
                    row["status"] = "fail"
                if not no_figures:
                    from . import figures

                    figures.render_stability_table(table, (outdir / name).with_suffix(".png"))
            elif kind == "ss":
                page, report = stability.borel_spectral_sequence(
                    spec, job["n"], maxdeg=job.get("maxdeg", 2),
                    budget=job.get("budget", stability.DEFAULT_BUDGET),
                )
                if not report.passed:
                    row["status"] = "fail"
            else:
                row["status"] = "error"
                row["detail"] = f"unknown kind {kind!r}"
        except (CapExceeded, BudgetExceeded, ReductionBoundExceeded) as exc:
            row["status"] = "budget-exceeded"
            row["detail"] = str(exc)
        except CoxstabError as exc:
            row["status"] = "error"
            row["detail"] = str(exc)
        return row

    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda item: run_job(*item), enumerate(jobs)))
    else:
        rows = [run_job(i, job) for i, job in enumerate(jobs)]

    summary = outdir / "summary.csv"
    with open(summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "kind", "family", "n", "status", "detail"])
        for row in rows:
            writer.writerow([row["index"], row["kind"], row["family"], row["n"],
                             row["status"], row["detail"]])
    click.echo(f"wrote {summary}", err=True)
    if not no_figures and rows:
        from . import figures

        figures.render_campaign_summary(rows, outdir / "summary.png")

    doc = {
        "schema": SCHEMA_VERSION,
        "jobs": len(rows),
        "rows": rows,
        "passed": all(r["status"] != "fail" for r in rows),
    }
    click.echo(json.dumps(doc, indent=2))
    click.echo(f"elapsed: {time.perf_counter() - started:.2f}s", err=True)
    sys.exit(EXIT_OK if doc["passed"] else EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
