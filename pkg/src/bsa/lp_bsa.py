# ./src/bsa/lp_bsa.py

import logging
import time
from typing import List, Optional, Tuple

import numpy as np

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica
from src.bsa.errores import CertificateError, ProblemError, SolverError
from src.bsa.lp_solver import LpProblem, solve_lp
from src.bsa.minimax_core import MinimaxInstance, OpcionesMinimax, extract_support, solve_minimax
from src.bsa.models import (
    DualFunction, LpCertificate, MeasureGrid, ReporteVerificacion, SampledProblem, Solution
)
from src.bsa.problem import VectorLike, as_vector, least_squares_fit, residual_table

logger = logging.getLogger(__name__)


# === NORMAS Y FUNCIONALES ===


def lp_norm(f: np.ndarray, measure: MeasureGrid) -> float:
    """(Σ_s m_s |f(s)|^p)^{1/p}."""
    f = np.asarray(f, dtype=float).reshape(-1)
    return float(np.sum(measure.weights * np.abs(f) ** measure.p) ** (1.0 / measure.p))


def dual_norm(g: np.ndarray, measure: MeasureGrid) -> float:
    """‖g‖_q con q conjugado de p; para p = 1 es max_s |g(s)|."""
    g = np.asarray(g, dtype=float).reshape(-1)
    q = measure.q
    if np.isinf(q):
        return float(np.abs(g).max(initial=0.0))
    return float(np.sum(measure.weights * np.abs(g) ** q) ** (1.0 / q))


def _funcionales(residuos: np.ndarray, measure: MeasureGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Normas p por fila y funcionales normantes (fila nula → funcional nulo)."""
    p = measure.p
    normas = np.sum(measure.weights * np.abs(residuos) ** p, axis=-1) ** (1.0 / p)
    if p == 1.0:
        return normas, np.sign(residuos)
    seguras = np.where(normas > 0, normas, 1.0)[..., np.newaxis]
    return normas, np.sign(residuos) * (np.abs(residuos) / seguras) ** (p - 1.0)


def norming_functional(r: np.ndarray, measure: MeasureGrid) -> DualFunction:
    """
    Funcional g de la bola unidad de L^q con Σ_s m_s g(s) r(s) = ‖r‖_p.

    Para p > 1, g = sign(r)|r|^{p−1}/‖r‖_p^{p−1}; para p = 1, g = sign(r) con
    sign(0) = 0.
    """
    r = np.asarray(r, dtype=float).reshape(-1)
    if r.shape[0] != len(measure.point_labels):
        raise ValueError("el residuo debe estar tabulado sobre los puntos de la medida")
    if not np.any(r):
        raise ValueError("zero residual: el funcional normante no está definido")
    _, g = _funcionales(r, measure)
    return DualFunction(point_labels=list(measure.point_labels), values=g, p=measure.p)


def _requerir_medida(problem: SampledProblem) -> MeasureGrid:
    if problem.measure is None:
        raise ProblemError("el problema no tiene medida: se requiere 'measure' para la norma L^p",
                           field="measure")
    if problem.d != 1:
        raise ProblemError("la norma L^p requiere funciones escalares (codomain_dim = 1)",
                           field="codomain_dim")
    return problem.measure


def _residuos(problem: SampledProblem, c: np.ndarray) -> np.ndarray:
    return residual_table(problem, c)[:, :, 0]


def residual_lp_norms(problem: SampledProblem, c: VectorLike) -> np.ndarray:
    """‖f_a − Bc‖_p para cada parámetro."""
    medida = _requerir_medida(problem)
    normas, _ = _funcionales(_residuos(problem, as_vector(c)), medida)
    return normas


def lp_deviation(problem: SampledProblem, c: VectorLike) -> float:
    """max_a ‖f_a − Bc‖_p."""
    return float(residual_lp_norms(problem, c).max())


# === SOLVER ===


def _instancia(problem: SampledProblem) -> MinimaxInstance:
    """Oráculo c ↦ (‖f_a − Bc‖_p, −B^T (m ⊙ g_a)) sobre V = A."""
    medida = problem.measure
    base = problem.basis.values[:, :, 0].T
    m, p = medida.weights, medida.p

    def oraculo(c: np.ndarray):
        normas, g = _funcionales(_residuos(problem, c), medida)
        return normas, -(g * m) @ base

    def hessiano(c: np.ndarray, indices: np.ndarray) -> np.ndarray:
        hessianos = np.zeros((indices.shape[0], problem.n, problem.n))
        if p == 1.0:
            return hessianos
        residuos = _residuos(problem, c)[indices]
        normas, g = _funcionales(residuos, medida)
        for posicion, norma in enumerate(normas):
            if norma <= 0:
                continue
            absolutos = np.maximum(np.abs(residuos[posicion]), 1e-12 * norma) if p < 2 else np.abs(residuos[posicion])
            diagonal = m * (absolutos / norma) ** (p - 2.0)
            mg = m * g[posicion]
            hr = (p - 1.0) / norma * (np.diag(diagonal) - np.outer(mg, mg))
            hessianos[posicion] = base.T @ hr @ base
        return hessianos

    return MinimaxInstance(n=problem.n, num_v=problem.params.size, mode="oracle",
                           oracle=oraculo, hessian=hessiano)


def _certificado_p1(problem: SampledProblem, c: np.ndarray, valor: float,
                    config: ConfiguracionNumerica) -> Tuple[List[int], List[float], List[np.ndarray]]:
    """
    Certificado para p = 1: en los puntos de residuo nulo el funcional puede
    tomar cualquier valor de [−1, 1]. Con w_i(s) = λ_i g_i(s) la condición de
    ortogonalidad es lineal y se minimiza su norma infinito.
    """
    medida = problem.measure
    m = medida.weights
    base = problem.basis.values[:, :, 0].T
    n = problem.n
    residuos = _residuos(problem, c)
    normas, signos = _funcionales(residuos, medida)
    escala = max(1.0, valor)
    activos = np.flatnonzero(normas >= valor - 1e-7 * escala)
    umbral = 1e-7 * max(1.0, float(np.abs(residuos).max(initial=0.0)))
    nulos = [np.flatnonzero(np.abs(residuos[a]) <= umbral) for a in activos]

    k = activos.shape[0]
    num_w = sum(len(z) for z in nulos)
    # Variables: λ (k), w (num_w), t (1)
    columnas = k + num_w + 1
    fijo = np.array([((m * np.where(np.abs(residuos[a]) <= umbral, 0.0, signos[a])) @ base) for a in activos])

    ortogonal = np.zeros((n, columnas))
    ortogonal[:, :k] = fijo.T
    acotar = []
    desplazamiento = k
    for i, puntos in enumerate(nulos):
        for s in puntos:
            ortogonal[:, desplazamiento] = m[s] * base[s]
            fila_mas = np.zeros(columnas)
            fila_mas[desplazamiento], fila_mas[i] = 1.0, -1.0
            fila_menos = np.zeros(columnas)
            fila_menos[desplazamiento], fila_menos[i] = -1.0, -1.0
            acotar.extend([fila_mas, fila_menos])
            desplazamiento += 1

    t = np.zeros((n, columnas))
    t[:, -1] = -1.0
    suma = np.zeros((1, columnas))
    suma[0, :k] = 1.0
    A = np.vstack([ortogonal + t, -ortogonal + t] + ([np.array(acotar)] if acotar else []) + [suma])
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    costos = np.zeros(columnas)
    costos[-1] = 1.0
    inferiores = np.concatenate([np.zeros(k), np.full(num_w, -np.inf), [0.0]])
    sentidos = ["<="] * (A.shape[0] - 1) + ["="]
    resultado = solve_lp(LpProblem(c=costos, A=A, b=b, senses=sentidos, lower=inferiores), config)
    if not resultado.optimal:
        raise SolverError(f"no se pudo construir el certificado L^1 ({resultado.status})")

    lam = resultado.x[:k]
    funcionales = []
    desplazamiento = k
    for i, a in enumerate(activos):
        g = np.where(np.abs(residuos[a]) <= umbral, 0.0, signos[a])
        for s in nulos[i]:
            w = resultado.x[desplazamiento]
            g[s] = np.clip(w / lam[i], -1.0, 1.0) if lam[i] > 0 else 0.0
            desplazamiento += 1
        funcionales.append(g)
    return list(activos), list(lam), funcionales


def _certificado(problem: SampledProblem, c: np.ndarray, valor: float, indices: List[int],
                 pesos: List[float], funcionales: List[np.ndarray]) -> LpCertificate:
    """Reducir a n+1 átomos sobre las sumas Σ_s m_s g_i(s) B(s) y armar el certificado."""
    medida = problem.measure
    base = problem.basis.values[:, :, 0].T
    momentos = np.array([(medida.weights * g) @ base for g in funcionales])
    atomos = extract_support(pesos, list(range(len(indices))), problem.n, gradients=momentos)
    return LpCertificate(
        params=[problem.params.labels[indices[a.v]] for a in atomos],
        lambdas=[a.weight for a in atomos],
        duals=[DualFunction(point_labels=list(medida.point_labels), values=funcionales[a.v],
                            p=medida.p).as_dict() for a in atomos],
        p=medida.p,
        value=valor,
        degenerate=False,
    )


def solve_lp_bsa(problem: SampledProblem, config: Optional[ConfiguracionNumerica] = None) -> Solution:
    """
    Mejor aproximación simultánea en la norma L^p ponderada.

    Minimiza max_a ‖f_a − Bc‖_p con planos cortantes; el subgradiente de
    c ↦ ‖f_a − Bc‖_p es −(Σ_s m_s g_a(s) B[j](s))_j con g_a el funcional
    normante del residuo. Los átomos del certificado llevan esos funcionales.

    Parameters
    ----------
    problem : SampledProblem
        Problema escalar con medida (S, m, p)
    config : Optional[ConfiguracionNumerica]
        Tolerancias y límites

    Returns
    -------
    Solution
        Coeficientes, valor y LpCertificate
    """
    config = config or CONFIG_DEFECTO
    medida = _requerir_medida(problem)
    inicio = time.time()

    iteraciones = config.max_iter_kelley_p_cercano_1 if medida.p < 1.2 else config.max_iter_kelley
    opciones = OpcionesMinimax(initial=least_squares_fit(problem).tolist(), max_iter=iteraciones)
    resultado = solve_minimax(_instancia(problem), opciones, config)

    c = resultado.u_array
    valor = lp_deviation(problem, c)
    escala = max(1.0, float(np.abs(problem.family.values).max(initial=0.0)))

    if valor <= 1e-12 * escala:
        logger.info("Certificado L^p degenerado: la aproximación reproduce toda la familia")
        certificado = LpCertificate(
            params=[problem.params.labels[resultado.certificate.atoms[0].v]], lambdas=[1.0],
            duals=[{s: 0.0 for s in medida.point_labels}], p=medida.p, value=0.0, degenerate=True,
        )
    elif medida.p == 1.0:
        indices, pesos, funcionales = _certificado_p1(problem, c, valor, config)
        certificado = _certificado(problem, c, valor, indices, pesos, funcionales)
    else:
        residuos = _residuos(problem, c)
        indices = [a.v for a in resultado.certificate.atoms]
        funcionales = []
        for a in indices:
            if not np.any(residuos[a]):
                raise CertificateError(
                    f"residuo nulo en el parámetro de soporte {problem.params.labels[a]} con valor {valor:.6g} > 0"
                )
            funcionales.append(norming_functional(residuos[a], medida).values)
        pesos = [a.weight for a in resultado.certificate.atoms]
        certificado = _certificado(problem, c, valor, indices, pesos, funcionales)

    logger.info("BSA L^%g '%s': valor %.12g, k = %d", medida.p, problem.name, valor, certificado.k)
    return Solution(
        norm="lp",
        coefficients=c.tolist(),
        value=valor,
        certificate=certificado,
        saddle=resultado.certificate,
        diagnostics={**resultado.diagnostics, "p": medida.p, "total_elapsed": time.time() - inicio},
    )


# === VERIFICADOR ===


def verify_lp_certificate(problem: SampledProblem, c: VectorLike, cert: LpCertificate,
                          tol: Optional[float] = None,
                          config: Optional[ConfiguracionNumerica] = None) -> ReporteVerificacion:
    """
    Verificar las condiciones (i) y (ii) de un certificado L^p.

    (i)  max_j |Σ_s m_s (Σ_i λ_i g_i(s)) B[j](s)|
    (ii) |Σ_s m_s g_i(s) r_i(s) − ‖r_i‖_p| y |‖r_i‖_p − max_a ‖r_a‖_p|

    También se comprueba ‖g_i‖_q ≤ 1 y k ≤ n+1.
    """
    config = config or CONFIG_DEFECTO
    tol_i = tol if tol is not None else config.tol_condicion_i
    tol_ii = tol if tol is not None else config.tol_condicion_ii
    medida = _requerir_medida(problem)
    c = as_vector(c)
    if c.shape[0] != problem.n:
        raise ProblemError(f"dimension mismatch: se esperaban {problem.n} coeficientes, hay {c.shape[0]}")
    if cert.p != medida.p:
        raise ProblemError(f"dimension mismatch: el certificado es para p = {cert.p}, el problema usa p = {medida.p}")

    try:
        indices = [problem.params.index(a) for a in cert.params]
    except KeyError as e:
        raise ProblemError(f"el certificado no corresponde al problema: {e.args[0]}") from e
    puntos = medida.point_labels
    for dual in cert.duals:
        desconocidos = set(dual) - set(puntos)
        if desconocidos:
            raise ProblemError(f"unknown point label en un funcional dual: {sorted(desconocidos)[0]}")
    g = np.array([[dual.get(s, 0.0) for s in puntos] for dual in cert.duals])
    lam = np.array(cert.lambdas)

    residuos = _residuos(problem, c)
    normas, _ = _funcionales(residuos, medida)
    base = problem.basis.values[:, :, 0].T
    reporte = ReporteVerificacion(subject="lp")

    reporte.agregar("soporte", max(0, cert.k - (problem.n + 1)), 0.0,
                    detail=f"k = {cert.k}, n+1 = {problem.n + 1}")
    exceso = max(dual_norm(fila, medida) for fila in g) - 1.0
    reporte.agregar("G", max(0.0, exceso), tol_i, detail="max_i ‖g_i‖_q − 1")

    ortogonalidad = (medida.weights * (lam @ g)) @ base
    reporte.agregar("(i)", float(np.abs(ortogonalidad).max()), tol_i,
                    detail="max_j |∫ (Σ λ_i g_i) h_j dm|")

    pareos = np.sum(medida.weights * g * residuos[indices], axis=1)
    maximo = float(normas.max())
    residuo_ii = max(float(np.abs(pareos - normas[indices]).max()),
                     float(np.abs(normas[indices] - maximo).max()))
    reporte.agregar("(ii)", residuo_ii, tol_ii,
                    detail=f"max_a ‖f_a − f*‖_p = {maximo:.12g}")
    return reporte
