# ./src/bsa/unicity.py

import itertools
import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.special import comb

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica
from src.bsa.errores import CertificateError, ProblemError
from src.bsa.models import (
    Basis, DomainGrid, ReporteHaar, ReporteUnicidad, SampledProblem, SubconjuntoHaar,
    UniformCertificate, UnicityData
)
from src.bsa.problem import VectorLike, approximant_table, as_vector, uniform_deviation

logger = logging.getLogger(__name__)


def all_point_subsets(labels: Sequence[str], n: int, limit: Optional[int] = 100000) -> List[List[str]]:
    """Todos los subconjuntos de n puntos, en orden lexicográfico de la malla."""
    total = int(comb(len(labels), n, exact=True))
    if limit is not None and total > limit:
        raise ValueError(f"{total} subconjuntos superan el límite de {limit}")
    return [list(subconjunto) for subconjunto in itertools.combinations(labels, n)]


def haar_check(basis: Basis, point_sets: Sequence[Sequence[str]],
               config: Optional[ConfiguracionNumerica] = None) -> ReporteHaar:
    """
    Determinantes de colocación |det[B[j](x_i)]| de cada subconjunto de n puntos.

    Un subconjunto falla si el determinante no supera tol_haar veces el
    producto de las normas de las filas (cota de Hadamard); cada falla es un
    testigo de que la base no es de Haar en la malla.
    """
    config = config or CONFIG_DEFECTO
    if basis.d != 1:
        raise ValueError("haar_check requiere funciones escalares (d = 1)")

    reporte = ReporteHaar()
    for puntos in point_sets:
        puntos = list(puntos)
        if len(puntos) != basis.n:
            raise ProblemError(f"cada subconjunto debe tener n = {basis.n} puntos")
        if len(set(puntos)) != len(puntos):
            raise ProblemError(f"repeated points en el subconjunto {puntos}")
        columnas = [basis.index(x) for x in puntos]
        matriz = basis.values[:, columnas, 0].T
        determinante = float(np.linalg.det(matriz))
        umbral = config.tol_haar * float(np.prod(np.linalg.norm(matriz, axis=1)))
        reporte.subsets.append(SubconjuntoHaar(
            points=puntos, determinant=determinante, threshold=umbral,
            passed=bool(abs(determinante) > umbral),
        ))
    return reporte


def _malla_densa(problem: SampledProblem, dense_grid: Optional[DomainGrid]) -> np.ndarray:
    """Matriz |G| × n de la base sobre la malla densa (subconjunto del dominio)."""
    if dense_grid is None:
        return problem.basis.values[:, :, 0].T
    try:
        columnas = [problem.domain.index(x) for x in dense_grid.labels]
    except KeyError as e:
        raise ProblemError(f"la malla densa debe ser parte del dominio: {e.args[0]}") from e
    return problem.basis.values[:, columnas, 0].T


def strong_unicity_gamma(problem: SampledProblem, cert: UniformCertificate,
                         dense_grid: Optional[DomainGrid] = None,
                         config: Optional[ConfiguracionNumerica] = None) -> UnicityData:
    """
    Constante de unicidad fuerte γ por enumeración de vértices.

    El politopo P = {c : σ_i (Bc)(x_i) ≤ 1} tiene a lo sumo n+1 vértices,
    cada uno solución de n de las n+1 igualdades. Como
    γ = min_{‖h‖=1} max_i σ_i h(x_i) es el inverso del máximo de ‖Bc‖∞ sobre P,
    basta evaluar ‖Bc‖∞ en los vértices.

    Parameters
    ----------
    problem : SampledProblem
        Problema escalar (d = 1)
    cert : UniformCertificate
        Certificado con k = n+1 puntos distintos y δ > 0
    dense_grid : Optional[DomainGrid]
        Puntos donde se evalúa ‖h‖∞ (todo el dominio por defecto)
    config : Optional[ConfiguracionNumerica]
        Umbral de singularidad LU

    Returns
    -------
    UnicityData
        γ, signos, puntos, δ y los vértices de P

    Raises
    ------
    CertificateError
        k ≠ n+1, δ = 0, puntos repetidos o subsistema singular
    """
    config = config or CONFIG_DEFECTO
    n = problem.n
    if problem.d != 1:
        raise ValueError("la unicidad fuerte solo está establecida para d = 1")
    if cert.degenerate or cert.delta <= 0:
        raise CertificateError("δ = 0: la aproximación interpola la familia y γ no está definida")
    if cert.k != n + 1:
        raise CertificateError(f"k must equal n+1 (k = {cert.k}, n+1 = {n + 1})")

    puntos = [par.point for par in cert.pairs]
    if len(set(puntos)) != len(puntos):
        raise CertificateError(f"repeated points en el certificado: {puntos}")
    sigma = [1 if direccion[0] > 0 else -1 for direccion in cert.directions]

    columnas = [problem.domain.index(x) for x in puntos]
    restricciones = np.array(sigma, dtype=float)[:, np.newaxis] * problem.basis.values[:, columnas, 0].T
    densa = _malla_densa(problem, dense_grid)

    vertices, normas = [], []
    for omitida in range(n + 1):
        filas = [i for i in range(n + 1) if i != omitida]
        sistema = restricciones[filas]
        lu, pivotes = lu_factor(sistema, check_finite=False)
        diagonal = np.abs(np.diag(lu))
        if diagonal.min() <= config.tol_lu * max(diagonal.max(), np.abs(sistema).max()):
            raise CertificateError(f"singular n-subset: puntos {[puntos[i] for i in filas]}")
        vertice = lu_solve((lu, pivotes), np.ones(n), check_finite=False)
        if restricciones[omitida] @ vertice > 1 + 1e-9:
            logger.warning("El candidato que omite %s viola su restricción; se descarta", puntos[omitida])
            continue
        vertices.append(vertice.tolist())
        normas.append(float(np.abs(densa @ vertice).max()))

    if not vertices:
        raise CertificateError("el politopo de unicidad no tiene vértices factibles")
    gamma = 1.0 / max(normas)
    logger.info("γ = %.12g a partir de %d vértices", gamma, len(vertices))
    return UnicityData(gamma=gamma, sigma=sigma, points=puntos, delta=cert.delta,
                       vertices=vertices, vertex_norms=normas)


def _norma_uniforme(problem: SampledProblem, c: np.ndarray) -> float:
    return float(np.abs(approximant_table(problem.basis, c)).max())


def strong_unicity_slack(problem: SampledProblem, c_star: VectorLike, h: VectorLike, gamma: float) -> float:
    """max‖f_a − h‖ − max‖f_a − f*‖ − γ‖f* − h‖ evaluado en la malla."""
    c_star, h = as_vector(c_star), as_vector(h)
    return (uniform_deviation(problem, h) - uniform_deviation(problem, c_star)
            - gamma * _norma_uniforme(problem, c_star - h))


def check_strong_unicity(problem: SampledProblem, c_star: VectorLike, data: UnicityData,
                         trials: int = 1000, seed: int = 42, radius: Optional[float] = None,
                         slack_tol: float = 1e-10) -> ReporteUnicidad:
    """
    Validar empíricamente la desigualdad de unicidad fuerte.

    Cada competidor h usa su propio generador derivado de la semilla maestra;
    los coeficientes son c* + radius · U[−1, 1]^n y se descartan los h con
    ‖f* − h‖∞ < 1e−8.
    """
    c_star = as_vector(c_star)
    n = c_star.shape[0]
    if radius is None:
        radius = max(1.0, float(np.abs(c_star).max(initial=0.0)))
    valor = uniform_deviation(problem, c_star)

    razones, holguras = [], []
    for semilla in np.random.SeedSequence(seed).spawn(trials):
        generador = np.random.default_rng(semilla)
        while True:
            h = c_star + radius * generador.uniform(-1.0, 1.0, size=n)
            distancia = _norma_uniforme(problem, c_star - h)
            if distancia >= 1e-8:
                break
        desviacion = uniform_deviation(problem, h)
        razones.append((desviacion - valor) / distancia)
        holguras.append(desviacion - valor - data.gamma * distancia)

    holguras = np.array(holguras)
    violaciones = int(np.sum(holguras < -slack_tol))
    if violaciones:
        logger.warning("%d competidores violan la desigualdad de unicidad fuerte", violaciones)
    return ReporteUnicidad(
        gamma=data.gamma, vertices=data.vertices, min_ratio=float(min(razones)),
        min_slack=float(holguras.min()), trials=trials, seed=seed, violations=violaciones,
        slack_tol=slack_tol,
    )


def gamma_by_sampling(problem: SampledProblem, data: UnicityData, samples: int = 5000,
                      seed: int = 42, lote: int = 2000) -> float:
    """
    Estimador por muestreo de γ: mínimo de max_i σ_i h(x_i) sobre direcciones
    aleatorias normalizadas a ‖h‖∞ = 1. Es una cota superior de γ.
    """
    generador = np.random.default_rng(seed)
    columnas = [problem.domain.index(x) for x in data.points]
    puntos = problem.basis.values[:, columnas, 0].T * np.array(data.sigma, dtype=float)[:, np.newaxis]
    malla = problem.basis.values[:, :, 0].T

    estimacion = np.inf
    restantes = samples
    while restantes > 0:
        tamano = min(lote, restantes)
        coeficientes = generador.uniform(-1.0, 1.0, size=(tamano, problem.n))
        normas = np.abs(coeficientes @ malla.T).max(axis=1)
        validas = normas >= 1e-8
        coeficientes = coeficientes[validas] / normas[validas, np.newaxis]
        if coeficientes.size:
            estimacion = min(estimacion, float((coeficientes @ puntos.T).max(axis=1).min()))
        restantes -= tamano
    return estimacion
