"""
Six standard charts of Sigma(J^2) and the model equations inside them.

Sigma(J^2) carries the contact forms of J^2 plus three generators per
chart; the chart named after a coordinate plane (xy, xt, ...) describes
the integral planes projecting isomorphically onto that plane. Chart A is
the usual J^3.
"""

from dataclasses import dataclass
from enum import StrEnum
from functools import cache

import numpy as np
import sympy as sp

from prolongkit.constants import DEFAULT_SEED, RANK_TOL
from prolongkit.contact import CONTACT_LABELS, J2, PfaffianSystem, contact_system_j2
from prolongkit.exceptions import ChartError, UnknownModelError
from prolongkit.expr import Chart, coordinate, parse_expr
from prolongkit.forms import DifferentialForm, covector_rows, pullback
from prolongkit.linalg import rank


class Model(StrEnum):
    WAVE = "wave"
    PARABOLIC = "parabolic"
    LAPLACE = "laplace"


MODEL_EQUATIONS = {Model.WAVE: "s", Model.PARABOLIC: "r", Model.LAPLACE: "r + t"}

PLANES = {"A": "xy", "B": "xt", "C": "yr", "D": "rs", "E": "rt", "F": "st"}

FIBER_COORDINATES = {
    "A": ("p111", "p112", "p122", "p222"),
    "B": ("a", "B", "c", "e"),
    "C": ("a", "B", "c", "e"),
    "D": ("B", "D", "E", "F"),
    "E": ("A", "D", "E", "F"),
    "F": ("A", "B", "E", "F"),
}

# Generators beyond the contact forms, as (label, {coordinate: coefficient})
_GENERATORS: dict[str, tuple[tuple[str, dict[str, str]], ...]] = {
    "A": (
        ("varpi_r", {"r": "1", "x": "-p111", "y": "-p112"}),
        ("varpi_s", {"s": "1", "x": "-p112", "y": "-p122"}),
        ("varpi_t", {"t": "1", "x": "-p122", "y": "-p222"}),
    ),
    "B": (
        ("varpi_y", {"y": "1", "x": "-a", "t": "-B"}),
        ("varpi_r", {"r": "1", "x": "-c", "t": "-(a^2 + e*B)"}),
        ("varpi_s", {"s": "1", "x": "-e", "t": "a"}),
    ),
    "C": (
        ("varpi_x", {"x": "1", "y": "-a", "r": "-B"}),
        ("varpi_s", {"s": "1", "y": "-c", "r": "a"}),
        ("varpi_t", {"t": "1", "y": "-e", "r": "-(a^2 + B*c)"}),
    ),
    "D": (
        ("varpi_x", {"x": "1", "r": "-(D*E - B*F)", "s": "-B"}),
        ("varpi_y", {"y": "1", "r": "-B", "s": "-D"}),
        ("varpi_t", {"t": "1", "r": "-E", "s": "-F"}),
    ),
    "E": (
        ("varpi_x", {"x": "1", "r": "-A", "t": "D*E + F*(A*F + D*E^2)/(1 - E*F)"}),
        ("varpi_y", {"y": "1", "r": "A*F + E*(D*E + F*(A*F + D*E^2)/(1 - E*F))", "t": "-D"}),
        ("varpi_s", {"s": "1", "r": "-E", "t": "-F"}),
    ),
    "F": (
        ("varpi_x", {"x": "1", "s": "-A", "t": "-B"}),
        ("varpi_y", {"y": "1", "s": "-B", "t": "B*E - A*F"}),
        ("varpi_r", {"r": "1", "s": "-E", "t": "-F"}),
    ),
}

# Model equation inside a chart, solved for the listed coordinates
_EMBEDDINGS: dict[tuple[Model, str], dict[str, str]] = {
    (Model.WAVE, "A"): {"s": "0", "p112": "0", "p122": "0"},
    (Model.WAVE, "B"): {"s": "0", "a": "0", "e": "0"},
    (Model.WAVE, "E"): {"s": "0", "E": "0", "F": "0"},
    (Model.PARABOLIC, "A"): {"r": "0", "p111": "0", "p112": "0"},
    (Model.PARABOLIC, "F"): {"r": "0", "E": "0", "F": "0"},
    (Model.LAPLACE, "A"): {"t": "-r", "p122": "-p111", "p222": "-p112"},
    (Model.LAPLACE, "D"): {"t": "-r", "E": "-1", "F": "0"},
}


def resolve_atlas_chart(chart: str) -> str:
    """Chart letter from a letter, a plane name (``xt``) or ``V_xt``."""
    name = chart.removeprefix("V_")
    if name in PLANES:
        return name
    for letter, plane in PLANES.items():
        if name in (plane, plane[::-1]):
            return letter
    raise ChartError(f"unknown Sigma(J^2) chart {chart!r}; use A-F or one of {sorted(PLANES.values())}")


@dataclass(frozen=True, eq=False)
class SigmaJ2Chart:
    letter: str
    chart: Chart
    labels: tuple[str, ...]
    generators: tuple[DifferentialForm, ...]

    @property
    def plane(self) -> str:
        return PLANES[self.letter]

    @property
    def name(self) -> str:
        return f"V_{self.plane}"

    def system(self) -> PfaffianSystem:
        return PfaffianSystem(
            chart=self.chart,
            forms=self.generators,
            labels=self.labels,
            base_coordinates=J2.names,
            name=self.name,
            level=1,
        )


@cache
def sigma_j2_chart(chart: str) -> SigmaJ2Chart:
    letter = resolve_atlas_chart(chart)
    coordinates = J2.extend(*FIBER_COORDINATES[letter])
    forms = list(contact_system_j2(coordinates))
    labels = list(CONTACT_LABELS)
    for label, components in _GENERATORS[letter]:
        forms.append(
            DifferentialForm.one_form(
                coordinates, {name: parse_expr(text, coordinates) for name, text in components.items()}
            )
        )
        labels.append(label)
    return SigmaJ2Chart(letter, coordinates, tuple(labels), tuple(forms))


def sigma_j2_atlas() -> tuple[SigmaJ2Chart, ...]:
    return tuple(sigma_j2_chart(letter) for letter in PLANES)


@dataclass(frozen=True, eq=False)
class EmbeddedModel:
    """A model equation inside a Sigma(J^2) chart, with its induced forms."""

    model: Model
    ambient: SigmaJ2Chart
    equations: tuple[sp.Expr, ...]
    substitution: dict[str, sp.Expr]
    chart: Chart
    forms: tuple[DifferentialForm, ...]
    labels: tuple[str, ...]

    def system(self) -> PfaffianSystem:
        return PfaffianSystem(
            chart=self.chart,
            forms=self.forms,
            labels=self.labels,
            base_coordinates=tuple(name for name in J2.names if name in self.chart),
            name=f"{self.model.value} in {self.ambient.name}",
            level=1,
        )


def _independent_forms(
    forms: list[DifferentialForm], labels: list[str], chart: Chart
) -> tuple[tuple[DifferentialForm, ...], tuple[str, ...]]:
    rng = np.random.default_rng(DEFAULT_SEED)
    point = {name: float(rng.uniform(-0.5, 0.5)) for name in chart.names}
    kept: list[DifferentialForm] = []
    kept_labels: list[str] = []
    for form, label in zip(forms, labels, strict=True):
        if form.is_trivial:
            continue
        candidate = [*kept, form]
        if rank(covector_rows(candidate, point, chart.dim), RANK_TOL) == len(candidate):
            kept.append(form)
            kept_labels.append(label)
    return tuple(kept), tuple(kept_labels)


@cache
def embed_model(model: Model | str, chart: str) -> EmbeddedModel:
    try:
        model = Model(model)
    except ValueError:
        raise UnknownModelError(f"unknown model {model!r}; use one of {[m.value for m in Model]}") from None
    ambient = sigma_j2_chart(chart)
    key = (model, ambient.letter)
    if key not in _EMBEDDINGS:
        supported = sorted(PLANES[letter] for found, letter in _EMBEDDINGS if found is model)
        raise ChartError(f"no embedding of the {model.value} model in {ambient.name}; supported: {supported}")

    solved = _EMBEDDINGS[key]
    reduced = ambient.chart.without(*solved)
    substitution = {name: parse_expr(text, reduced) for name, text in solved.items()}
    equations = tuple(sp.expand(coordinate(name) - value) for name, value in substitution.items())
    pulled = [pullback(substitution, form, reduced) for form in ambient.generators]
    forms, labels = _independent_forms(pulled, list(ambient.labels), reduced)
    return EmbeddedModel(model, ambient, equations, substitution, reduced, forms, labels)
