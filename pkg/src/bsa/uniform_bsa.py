# ./src/bsa/uniform_bsa.py

import logging
import time
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica
from src.bsa.errores import CertificateError, ProblemError
from src.bsa.minimax_core import MinimaxInstance, OpcionesMinimax, solve_minimax
from src.bsa.models import (
    ParPunto, ReporteAlternancia, ReporteDefinicion, ReporteVerificacion,
    SaddleCertificate, SampledProblem, Solution, UniformCertificate
)
from src.bsa.problem import (
    VectorLike, as_vector, least_squares_fit, residual_table, uniform_deviation
)

logger = logging.getLogger(__name__)

Metodo = Literal["auto", "lp", "cutting_plane"]


# === INSTANCIAS MINIMAX SOBRE LOS PARES (a, x) ===
# Los pares se indexan como v = índice(a) · |X| + índice(x).


def _par(problem: SampledProblem, v: int) -> Tuple[int, int]:
    return divmod(int(v), problem.domain.size)


def _instancia_lp(problem: SampledProblem) -> MinimaxInstance:
    """Filas ±(f_a(x) − (Bc)(x)) ≤ t para d = 1."""
    num_a, num_x = problem.params.size, problem.domain.size
    alphas = problem.family.values[:, :, 0].reshape(-1)
    columnas = problem.basis.values[:, :, 0].T
    betas = -np.tile(columnas, (num_a, 1))
    return MinimaxInstance(n=problem.n, num_v=num_a * num_x, mode="affine",
                           alphas=alphas, betas=betas, absolute=True)


def _instancia_oraculo(problem: SampledProblem) -> MinimaxInstance:
    """
    J(c, (a, x)) = ‖f_a(x) − B_x c‖₂ con subgradiente −B_x^T w (w dirección del
    residuo; cero si el residuo es nulo) y hessiano B_x^T (I − w w^T) B_x / ‖r‖.
    """
    base = problem.basis.values
    num_v = problem.params.size * problem.domain.size
    n, d = problem.n, problem.d

    def direcciones(c: np.ndarray):
        residuos = residual_table(problem, c).reshape(num_v, d)
        normas = np.linalg.norm(residuos, axis=1)
        seguras = np.where(normas > 0, normas, 1.0)
        return residuos / seguras[:, np.newaxis] * (normas > 0)[:, np.newaxis], normas

    def oraculo(c: np.ndarray):
        w, normas = direcciones(c)
        w = w.reshape(problem.params.size, problem.domain.size, d)
        gradientes = -np.einsum("jxd,axd->axj", base, w).reshape(num_v, n)
        return normas, gradientes

    def hessiano(c: np.ndarray, indices: np.ndarray) -> np.ndarray:
        w, normas = direcciones(c)
        hessianos = np.zeros((indices.shape[0], n, n))
        for posicion, v in enumerate(indices):
            if normas[v] <= 0:
                continue
            _, x = _par(problem, v)
            bx = base[:, x, :].T
            proyector = np.eye(d) - np.outer(w[v], w[v])
            hessianos[posicion] = bx.T @ proyector @ bx / normas[v]
        return hessianos

    return MinimaxInstance(n=n, num_v=num_v, mode="oracle", oracle=oraculo, hessian=hessiano)


def _certificado_desde_silla(problem: SampledProblem, c: np.ndarray, silla: SaddleCertificate,
                             valor: float) -> UniformCertificate:
    """Convertir átomos de silla en pares (a_i, x_i) con direcciones de residuo."""
    escala = max(1.0, float(np.abs(problem.family.values).max(initial=0.0)))
    residuos = residual_table(problem, c)
    degenerado = valor <= 1e-12 * escala

    if degenerado:
        a, x = _par(problem, silla.atoms[0].v)
        direccion = np.zeros(problem.d)
        direccion[0] = 1.0
        logger.info("Certificado degenerado: la aproximación interpola toda la familia")
        return UniformCertificate(
            pairs=[ParPunto(param=problem.params.labels[a], point=problem.domain.labels[x])],
            lambdas=[1.0], directions=[direccion.tolist()], delta=0.0, degenerate=True,
        )

    pares, pesos, direcciones = [], [], []
    for atomo in silla.atoms:
        a, x = _par(problem, atomo.v)
        r = residuos[a, x]
        norma = float(np.linalg.norm(r))
        if norma <= 1e-12 * escala:
            raise CertificateError(
                f"residuo nulo en el punto de soporte ({problem.params.labels[a]}, "
                f"{problem.domain.labels[x]}) con δ = {valor:.6g} > 0"
            )
        direccion = (r / norma).tolist()
        pares.append(ParPunto(param=problem.params.labels[a], point=problem.domain.labels[x]))
        pesos.append(atomo.weight)
        direcciones.append(direccion)

    return UniformCertificate(pairs=pares, lambdas=pesos, directions=direcciones,
                              delta=float(valor), degenerate=False)


# === SOLVER ===


def solve_uniform_bsa(problem: SampledProblem, method: Metodo = "auto",
                      config: Optional[ConfiguracionNumerica] = None) -> Solution:
    """
    Mejor aproximación simultánea en la norma uniforme sobre la malla.

    Para d = 1 resuelve el programa lineal de epígrafo con filas
    ±(f_a(x) − (Bc)(x)) ≤ t; para d ≥ 2 ejecuta planos cortantes con
    J = ‖residuo‖₂. `method` permite forzar planos cortantes también en d = 1.

    Parameters
    ----------
    problem : SampledProblem
        Problema discretizado válido
    method : str
        "auto", "lp" o "cutting_plane"
    config : Optional[ConfiguracionNumerica]
        Tolerancias y límites

    Returns
    -------
    Solution
        Coeficientes c*, valor δ y certificado uniforme
    """
    config = config or CONFIG_DEFECTO
    inicio = time.time()
    if method == "auto":
        method = "lp" if problem.d == 1 else "cutting_plane"
    if method == "lp" and problem.d != 1:
        raise ValueError("el método 'lp' solo aplica con codominio escalar (d = 1)")

    if method == "lp":
        instancia = _instancia_lp(problem)
        resultado = solve_minimax(instancia, config=config)
    else:
        instancia = _instancia_oraculo(problem)
        opciones = OpcionesMinimax(initial=least_squares_fit(problem).tolist())
        resultado = solve_minimax(instancia, opciones, config)

    c = resultado.u_array
    valor = uniform_deviation(problem, c)
    certificado = _certificado_desde_silla(problem, c, resultado.certificate, valor)
    logger.info("BSA uniforme '%s': δ = %.12g, k = %d (%s)", problem.name, valor, certificado.k, method)

    return Solution(
        norm="uniform",
        coefficients=c.tolist(),
        value=valor,
        certificate=certificado,
        saddle=resultado.certificate,
        diagnostics={**resultado.diagnostics, "solver": method, "total_elapsed": time.time() - inicio},
    )


def certificate_of(solution: Solution, problem: Optional[SampledProblem] = None) -> UniformCertificate:
    """
    Certificado uniforme de una solución óptima.

    Con el problema disponible se reconstruye a partir de los átomos de silla
    (pesos duales del solver); si no, se devuelve el almacenado.
    """
    if solution.norm != "uniform":
        raise CertificateError("la solución no es de norma uniforme")
    if problem is None or solution.saddle is None:
        return solution.certificate
    return _certificado_desde_silla(problem, solution.c, solution.saddle, solution.value)


# === VERIFICADORES ===


def _indices_certificado(problem: SampledProblem, cert: UniformCertificate) -> Tuple[List[int], List[int]]:
    try:
        params = [problem.params.index(par.param) for par in cert.pairs]
        puntos = [problem.domain.index(par.point) for par in cert.pairs]
    except KeyError as e:
        raise ProblemError(f"el certificado no corresponde al problema: {e.args[0]}") from e
    if any(len(direccion) != problem.d for direccion in cert.directions):
        raise ProblemError(f"dimension mismatch: las direcciones deben tener d = {problem.d}")
    return params, puntos


def _verificar_coeficientes(problem: SampledProblem, c: VectorLike) -> np.ndarray:
    c = as_vector(c)
    if c.shape[0] != problem.n:
        raise ProblemError(f"dimension mismatch: se esperaban {problem.n} coeficientes, hay {c.shape[0]}")
    return c


def verify_uniform_certificate(problem: SampledProblem, c: VectorLike, cert: UniformCertificate,
                               tol: Optional[float] = None,
                               config: Optional[ConfiguracionNumerica] = None) -> ReporteVerificacion:
    """
    Verificar las condiciones (i′) y (ii) de un certificado uniforme.

    (i′)  max_j |Σ_i λ_i ⟨u_i, B[j][x_i]⟩|; en el caso degenerado se usan los
          residuos en lugar de las direcciones.
    (ii)  |‖r(a_i, x_i)‖ − δ| y |δ − max_{a,x} ‖r‖| por enumeración completa.

    Además se informa si el soporte tiene a lo sumo n+1 átomos, si las
    direcciones coinciden con las de los residuos y la igualdad dual
    Σ_i λ_i ⟨u_i, r_i⟩ = δ.
    """
    config = config or CONFIG_DEFECTO
    tol_i = tol if tol is not None else config.tol_condicion_i
    tol_ii = tol if tol is not None else config.tol_condicion_ii
    c = _verificar_coeficientes(problem, c)
    params, puntos = _indices_certificado(problem, cert)

    residuos = residual_table(problem, c)
    r = residuos[params, puntos]
    normas = np.linalg.norm(r, axis=1)
    lam = np.array(cert.lambdas)
    u = np.array(cert.directions, dtype=float)
    reporte = ReporteVerificacion(subject="uniform")

    reporte.agregar("soporte", max(0, cert.k - (problem.n + 1)), 0.0,
                    detail=f"k = {cert.k}, n+1 = {problem.n + 1}")

    testigos = r if cert.degenerate else u
    bx = problem.basis.values[:, puntos, :]
    ortogonalidad = np.einsum("i,id,jid->j", lam, testigos, bx)
    reporte.agregar("(i')", float(np.abs(ortogonalidad).max()), tol_i,
                    detail="max_j |Σ λ_i ⟨u_i, B[j](x_i)⟩|")

    maximo = float(np.linalg.norm(residuos, axis=2).max())
    residuo_ii = max(float(np.abs(normas - cert.delta).max()), abs(cert.delta - maximo))
    reporte.agregar("(ii)", residuo_ii, tol_ii,
                    detail=f"δ = {cert.delta:.12g}, max ‖r‖ = {maximo:.12g}")

    if not cert.degenerate:
        seguras = np.where(normas > 0, normas, 1.0)[:, np.newaxis]
        desalineacion = np.linalg.norm(u - r / seguras, axis=1)
        desalineacion[normas == 0] = np.inf
        reporte.agregar("direcciones", float(desalineacion.max()), tol_ii,
                        detail="‖u_i − r_i/‖r_i‖‖")
        dualidad = float(np.einsum("i,id,id->", lam, u, r))
        reporte.agregar("dualidad", abs(dualidad - cert.delta), tol_ii,
                        detail=f"Σ λ_i ⟨u_i, r_i⟩ = {dualidad:.12g}")
    return reporte


def _objetivo(problem: SampledProblem, norm: str) -> Callable[[np.ndarray], float]:
    if norm == "uniform":
        return lambda c: uniform_deviation(problem, c)
    from src.bsa.lp_bsa import lp_deviation
    return lambda c: lp_deviation(problem, c)


def verify_bsa_by_definition(problem: SampledProblem, c: VectorLike, trials: int = 1000,
                             radius: Optional[float] = None, seed: int = 42,
                             norm: Literal["uniform", "lp"] = "uniform",
                             slack_tol: float = 1e-12) -> ReporteDefinicion:
    """
    Comprobación aleatoria de la definición de BSA.

    Compara el valor de c* con `trials` competidores uniformes en la bola
    euclídea de radio `radius` centrada en c*. Un competidor estrictamente
    mejor (más allá de `slack_tol`) cuenta como falla.
    """
    if trials < 1:
        raise ValueError("trials debe ser ≥ 1")
    c = _verificar_coeficientes(problem, c)
    if radius is None:
        radius = 0.1 * max(1.0, float(np.abs(c).max(initial=0.0)))
    objetivo = _objetivo(problem, norm)
    valor = objetivo(c)

    generador = np.random.default_rng(seed)
    n = c.shape[0]
    direcciones = generador.standard_normal((trials, n))
    direcciones /= np.linalg.norm(direcciones, axis=1, keepdims=True)
    radios = radius * generador.random(trials) ** (1.0 / n)

    holguras = np.array([objetivo(c + rho * direccion) - valor for rho, direccion in zip(radios, direcciones)])
    fallas = int(np.sum(holguras < -slack_tol))
    if fallas:
        logger.warning("%d competidores mejoran a c* en '%s'", fallas, problem.name)

    return ReporteDefinicion(
        trials=trials, radius=float(radius), seed=seed, value=valor,
        best_competitor=float(valor + holguras.min()), min_slack=float(holguras.min()),
        failures=fallas, slack_tol=slack_tol,
    )


def check_condition_i_by_sampling(problem: SampledProblem, c: VectorLike, cert: UniformCertificate,
                                  trials: int = 1000, seed: int = 42, radius: Optional[float] = None,
                                  tol: float = 1e-10) -> ReporteVerificacion:
    """
    Condición (i) en su forma original: ningún f ∈ H reduce la desviación
    ponderada Σ_i λ_i ‖f_{a_i}(x_i) − f(x_i)‖ del soporte por debajo de la de c*.
    """
    c = _verificar_coeficientes(problem, c)
    params, puntos = _indices_certificado(problem, cert)
    lam = np.array(cert.lambdas)
    valores = problem.family.values[params, puntos]
    bx = problem.basis.values[:, puntos, :]

    def ponderada(coeficientes: np.ndarray) -> float:
        aproximacion = np.einsum("j,jid->id", coeficientes, bx)
        return float(lam @ np.linalg.norm(valores - aproximacion, axis=1))

    base = ponderada(c)
    if radius is None:
        radius = max(1.0, float(np.abs(c).max(initial=0.0)))
    generador = np.random.default_rng(seed)
    competidores = c + radius * generador.uniform(-1.0, 1.0, size=(trials, c.shape[0]))
    mejor = min(ponderada(competidor) for competidor in competidores)

    reporte = ReporteVerificacion(subject="uniform-sampling")
    reporte.agregar("(i)", max(0.0, base - mejor), tol * max(1.0, base),
                    detail=f"Σ λ_i ‖r_i(c*)‖ = {base:.12g}, mejor competidor {mejor:.12g}")
    return reporte


def alternation_report(problem: SampledProblem, cert: UniformCertificate) -> ReporteAlternancia:
    """
    Signos σ_i de los puntos de soporte ordenados sobre el intervalo.

    Solo informa: la alternancia es la caracterización clásica para una
    función con base de Haar.
    """
    if problem.d != 1 or not problem.domain.interval:
        raise ValueError("la alternancia requiere d = 1 y una malla de intervalo")
    _, puntos = _indices_certificado(problem, cert)
    signos_por_punto = {}
    for x, direccion in zip(puntos, cert.directions):
        signos_por_punto.setdefault(x, int(np.sign(direccion[0])))

    ordenados = sorted(signos_por_punto, key=lambda x: problem.domain.coords[x, 0])
    signos = [signos_por_punto[x] for x in ordenados]
    alterna = all(s * t < 0 for s, t in zip(signos, signos[1:]))
    return ReporteAlternancia(
        points=[problem.domain.labels[x] for x in ordenados],
        coords=[float(problem.domain.coords[x, 0]) for x in ordenados],
        signs=signos,
        alternating=alterna,
    )
