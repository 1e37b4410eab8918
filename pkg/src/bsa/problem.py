# ./src/bsa/problem.py

import itertools
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica
from src.bsa.errores import ProblemError, campo_de_error
from src.bsa.models import (
    Basis, Coefficients, DomainGrid, FunctionFamily, MeasureGrid,
    ParameterGrid, SampledProblem, rango_numerico
)

logger = logging.getLogger(__name__)

NORMAS_CODOMINIO = ("euclidean", "absolute")

VectorLike = Union[Coefficients, np.ndarray, Sequence[float]]


# === ESQUEMA DEL ARCHIVO DE PROBLEMA ===


class PuntoArchivo(BaseModel):
    label: str = Field(..., description="Etiqueta del punto")
    coords: Union[float, List[float]] = Field(default_factory=list, description="Coordenadas")


class MedidaArchivo(BaseModel):
    weights: Dict[str, float] = Field(..., description="Peso positivo por punto")
    p: float = Field(..., description="Exponente p ≥ 1")


class ArchivoProblema(BaseModel):
    """
    Esquema JSON del archivo de problema.
    """
    name: Optional[str] = None
    domain_points: List[PuntoArchivo]
    interval: bool = False
    params: List[str]
    codomain_dim: int = Field(..., ge=1)
    codomain_norm: str = "euclidean"
    family: Dict[str, Dict[str, List[float]]]
    basis: List[Dict[str, List[float]]]
    measure: Optional[MedidaArchivo] = None


def as_vector(c: VectorLike) -> np.ndarray:
    """Convertir coeficientes a un vector float64."""
    if isinstance(c, Coefficients):
        return np.asarray(c.c, dtype=float)
    return np.asarray(c, dtype=float).reshape(-1)


def _verificar_unicas(etiquetas: List[str], campo: str):
    vistas = set()
    for etiqueta in etiquetas:
        if etiqueta in vistas:
            raise ProblemError(f"duplicate label: '{etiqueta}'", field=campo)
        vistas.add(etiqueta)


def _tabla(mapa: Dict[str, List[float]], puntos: List[str], d: int, campo: str) -> np.ndarray:
    """Tabular un mapa punto → vector sobre la malla, exigiendo completitud."""
    desconocidos = set(mapa) - set(puntos)
    if desconocidos:
        raise ProblemError(f"unknown point label: '{sorted(desconocidos)[0]}'", field=campo)

    tabla = np.empty((len(puntos), d))
    for i, punto in enumerate(puntos):
        if punto not in mapa:
            raise ProblemError(f"missing table entries: falta el punto '{punto}'", field=campo)
        vector = mapa[punto]
        if len(vector) != d:
            raise ProblemError(
                f"el punto '{punto}' tiene dimensión {len(vector)}, se esperaba codomain_dim = {d}",
                field=campo
            )
        tabla[i] = vector

    if not np.all(np.isfinite(tabla)):
        raise ProblemError("la tabla contiene valores no finitos", field=campo)
    return tabla


def _desde_esquema(archivo: ArchivoProblema, nombre: str, config: ConfiguracionNumerica) -> SampledProblem:
    etiquetas_puntos = [punto.label for punto in archivo.domain_points]
    _verificar_unicas(etiquetas_puntos, "domain_points")
    _verificar_unicas(archivo.params, "params")

    if not archivo.params:
        raise ProblemError("empty family: se requiere al menos un parámetro", field="params")
    if not archivo.basis:
        raise ProblemError("la base está vacía", field="basis")
    if archivo.codomain_norm not in NORMAS_CODOMINIO:
        raise ProblemError(
            f"unsupported codomain norm '{archivo.codomain_norm}' (use euclidean o absolute)",
            field="codomain_norm"
        )

    d = archivo.codomain_dim
    coords = []
    for punto in archivo.domain_points:
        valor = punto.coords if isinstance(punto.coords, list) else [punto.coords]
        coords.append(valor)
    if len({len(valor) for valor in coords}) > 1:
        raise ProblemError("todas las coordenadas deben tener la misma dimensión", field="domain_points")
    if coords and len(coords[0]) == 0:
        coords = [[float(i)] for i in range(len(coords))]

    desconocidos = set(archivo.family) - set(archivo.params)
    if desconocidos:
        raise ProblemError(f"unknown param label: '{sorted(desconocidos)[0]}'", field="family")

    valores_familia = []
    for param in archivo.params:
        if param not in archivo.family:
            raise ProblemError(f"missing table entries: falta el parámetro '{param}'", field="family")
        valores_familia.append(_tabla(archivo.family[param], etiquetas_puntos, d, f"family.{param}"))

    valores_base = [
        _tabla(fila, etiquetas_puntos, d, f"basis[{j}]") for j, fila in enumerate(archivo.basis)
    ]
    base_matriz = np.array(valores_base).reshape(len(valores_base), -1).T
    if rango_numerico(base_matriz, config.rank_tol) < len(valores_base):
        raise ProblemError(f"basis rank < n (n = {len(valores_base)})", field="basis")

    medida = None
    if archivo.measure is not None:
        pesos = _tabla(
            {k: [v] for k, v in archivo.measure.weights.items()}, etiquetas_puntos, 1, "measure.weights"
        )[:, 0]
        if np.any(pesos <= 0):
            raise ProblemError("non-positive measure weight", field="measure.weights")
        if archivo.measure.p < 1:
            raise ProblemError("el exponente p debe estar en [1, ∞)", field="measure.p")
        medida = MeasureGrid(point_labels=etiquetas_puntos, weights=pesos, p=archivo.measure.p)

    try:
        dominio = DomainGrid(labels=etiquetas_puntos, coords=np.array(coords, dtype=float),
                             interval=archivo.interval)
        familia = FunctionFamily(
            params=ParameterGrid(labels=list(archivo.params)),
            point_labels=etiquetas_puntos,
            values=np.array(valores_familia),
            codomain_norm=archivo.codomain_norm,
        )
        base = Basis(point_labels=etiquetas_puntos, values=np.array(valores_base))
        return SampledProblem.model_validate(
            {"domain": dominio, "family": familia, "basis": base, "measure": medida,
             "name": archivo.name or nombre},
            context={"rank_tol": config.rank_tol},
        )
    except ValidationError as e:
        error = e.errors()[0]
        campo = campo_de_error(error.get("loc", ()))
        raise ProblemError(error["msg"].removeprefix("Value error, "), field=campo) from e


def load_problem(path: Union[str, Path], config: Optional[ConfiguracionNumerica] = None) -> SampledProblem:
    """
    Cargar y validar un archivo de problema.

    Parameters
    ----------
    path : Union[str, Path]
        Ruta al archivo JSON (ver esquema `ArchivoProblema`)
    config : Optional[ConfiguracionNumerica]
        Tolerancias; `rank_tol` decide el rango numérico de la base

    Returns
    -------
    SampledProblem
        Problema validado

    Raises
    ------
    ProblemError
        Error de sintaxis (con línea), de esquema (con campo), base de rango
        deficiente, tablas incompletas o pesos no positivos
    """
    path = Path(path)
    try:
        with open(path, "r") as f:
            contenido = json.load(f)
    except json.JSONDecodeError as e:
        raise ProblemError(f"parse error: {e.msg} (column {e.colno})", line=e.lineno) from e

    try:
        archivo = ArchivoProblema.model_validate(contenido)
    except ValidationError as e:
        error = e.errors()[0]
        campo = campo_de_error(error.get("loc", ()))
        raise ProblemError(f"parse error: {error['msg']}", field=campo) from e

    problema = _desde_esquema(archivo, path.stem, config or CONFIG_DEFECTO)
    logger.debug("Problema '%s' cargado: |A|=%d |X|=%d n=%d d=%d", problema.name,
                 problema.params.size, problema.domain.size, problema.n, problema.d)
    return problema


def dump_problem(problem: SampledProblem, path: Union[str, Path]) -> Path:
    """
    Escribir un problema con el esquema documentado de `load_problem`.
    """
    puntos = problem.domain.labels
    contenido = {
        "name": problem.name,
        "domain_points": [
            {"label": etiqueta, "coords": problem.domain.coords[i].tolist()}
            for i, etiqueta in enumerate(puntos)
        ],
        "interval": problem.domain.interval,
        "params": list(problem.params.labels),
        "codomain_dim": problem.d,
        "codomain_norm": problem.family.codomain_norm,
        "family": {
            param: {punto: problem.family.values[a, x].tolist() for x, punto in enumerate(puntos)}
            for a, param in enumerate(problem.params.labels)
        },
        "basis": [
            {punto: problem.basis.values[j, x].tolist() for x, punto in enumerate(puntos)}
            for j in range(problem.n)
        ],
    }
    if problem.measure is not None:
        contenido["measure"] = {
            "weights": dict(zip(puntos, problem.measure.weights.tolist())),
            "p": problem.measure.p,
        }

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(contenido, f, indent=2)
    return path


# === EVALUACIÓN ===


def _indice_punto(basis: Basis, x: Union[str, int]) -> int:
    if isinstance(x, str):
        return basis.index(x)
    if not 0 <= int(x) < len(basis.point_labels):
        raise KeyError(f"unknown point label: {x}")
    return int(x)


def evaluate_approximant(basis: Basis, c: VectorLike, x: Union[str, int]) -> np.ndarray:
    """
    Evaluar f = Σ_j c_j B[j] en un punto de la malla.

    Parameters
    ----------
    basis : Basis
        Base tabulada
    c : VectorLike
        Coeficientes (longitud n)
    x : Union[str, int]
        Etiqueta (o posición) del punto

    Returns
    -------
    np.ndarray
        Vector de R^d
    """
    c = as_vector(c)
    if c.shape[0] != basis.n:
        raise ValueError(f"se esperaban {basis.n} coeficientes, se recibieron {c.shape[0]}")
    return c @ basis.values[:, _indice_punto(basis, x), :]


def residual(problem: SampledProblem, c: VectorLike, a: Union[str, int], x: Union[str, int]) -> np.ndarray:
    """Residuo f_a(x) − f(x) como vector de R^d (antes de aplicar la norma)."""
    indice_a = problem.params.index(a) if isinstance(a, str) else int(a)
    if not 0 <= indice_a < problem.params.size:
        raise KeyError(f"unknown param label: {a}")
    indice_x = _indice_punto(problem.basis, x)
    return problem.family.values[indice_a, indice_x] - evaluate_approximant(problem.basis, c, indice_x)


def approximant_table(basis: Basis, c: VectorLike) -> np.ndarray:
    """Valores de Σ_j c_j B[j] en toda la malla (|X| × d)."""
    c = as_vector(c)
    if c.shape[0] != basis.n:
        raise ValueError(f"se esperaban {basis.n} coeficientes, se recibieron {c.shape[0]}")
    return np.einsum("j,jxd->xd", c, basis.values)


def residual_table(problem: SampledProblem, c: VectorLike) -> np.ndarray:
    """Todos los residuos f_a(x) − f(x) (|A| × |X| × d)."""
    return problem.family.values - approximant_table(problem.basis, c)[np.newaxis]


def residual_norms(problem: SampledProblem, c: VectorLike) -> np.ndarray:
    """Norma de codominio de cada residuo (|A| × |X|)."""
    return np.linalg.norm(residual_table(problem, c), axis=2)


def uniform_deviation(problem: SampledProblem, c: VectorLike) -> float:
    """max_a |||f_a − f||| evaluado por enumeración completa."""
    return float(residual_norms(problem, c).max())


def least_squares_fit(problem: SampledProblem) -> np.ndarray:
    """
    Ajuste de mínimos cuadrados de la familia apilada.

    Minimizar Σ_a ‖f_a − Bc‖² equivale a ajustar la media de la familia; con
    una medida se ponderan los puntos con m_s.
    """
    matriz = problem.basis.matrix()
    objetivo = problem.family.values.mean(axis=0).reshape(-1)
    if problem.measure is not None:
        raiz = np.repeat(np.sqrt(problem.measure.weights), problem.d)
        matriz = matriz * raiz[:, np.newaxis]
        objetivo = objetivo * raiz
    solucion, *_ = np.linalg.lstsq(matriz, objetivo, rcond=None)
    return solucion


def with_family(problem: SampledProblem, family: FunctionFamily) -> SampledProblem:
    """El mismo problema con otra familia tabulada sobre la misma malla."""
    return SampledProblem(domain=problem.domain, family=family, basis=problem.basis,
                          measure=problem.measure, name=problem.name)


# === ENVOLTURA CONVEXA DE UNA FAMILIA FINITA ===


def _reticula_simplex(num_vertices: int, resolucion: int) -> np.ndarray:
    """Cuentas enteras no negativas que suman `resolucion`, en orden fijo."""
    filas = []
    for combinacion in itertools.combinations_with_replacement(range(num_vertices), resolucion):
        filas.append(np.bincount(combinacion, minlength=num_vertices))
    return np.array(filas[::-1], dtype=int)


def hull_family(finite_family: FunctionFamily, simplex_grid_resolution: int) -> FunctionFamily:
    """
    Tabular g_α = Σ_j α_j g_j sobre la retícula uniforme del símplex.

    Las coordenadas de α son múltiplos de 1/resolución que suman uno. Los
    vértices (α = e_j) conservan la etiqueta original; el resto se etiqueta con
    sus cuentas enteras. Cada parámetro guarda α como coordenadas.

    Parameters
    ----------
    finite_family : FunctionFamily
        Familia finita {g_1, ..., g_ℓ}
    simplex_grid_resolution : int
        Resolución de la retícula (≥ 1)

    Returns
    -------
    FunctionFamily
        Familia {g_α} sobre la retícula
    """
    if int(simplex_grid_resolution) < 1:
        raise ValueError("la resolución de la retícula debe ser ≥ 1")
    resolucion = int(simplex_grid_resolution)
    originales = finite_family.params.labels

    cuentas = _reticula_simplex(len(originales), resolucion)
    alfas = cuentas / resolucion

    etiquetas = []
    for fila in cuentas:
        if fila.max() == resolucion:
            etiquetas.append(originales[int(fila.argmax())])
        else:
            etiquetas.append(f"hull[{','.join(str(k) for k in fila)}]/{resolucion}")

    valores = np.tensordot(alfas, finite_family.values, axes=(1, 0))
    return FunctionFamily(
        params=ParameterGrid(labels=etiquetas, coords=alfas),
        point_labels=list(finite_family.point_labels),
        values=valores,
        codomain_norm=finite_family.codomain_norm,
    )
