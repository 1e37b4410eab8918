# ./src/bsa/minimax_core.py

import logging
import time
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.linalg import null_space

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica
from src.bsa.errores import CertificateError, IterationLimitError, SolverError, UnboundedError
from src.bsa.lp_solver import LpProblem, LpResult, dual_multipliers, solve_lp
from src.bsa.models import (
    ModeloInmutable, ReporteVerificacion, SaddleCertificate, SupportAtom, _arreglo_inmutable
)

logger = logging.getLogger(__name__)

Oraculo = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
OraculoHessiano = Callable[[np.ndarray, np.ndarray], np.ndarray]


class MinimaxInstance(ModeloInmutable):
    """
    Problema minimax discreto min_u max_{v ∈ V} J(u, v), con J convexa en u.

    En modo afín J(u, v) = α_v + β_v·u (o su valor absoluto si `absolute`).
    En modo oráculo `oracle(u)` devuelve (J(u, ·), subgradientes) para todo V;
    `hessian(u, índices)` es opcional y acelera el refinamiento final.
    """
    n: int = Field(..., ge=1, description="Dimensión del espacio de u")
    num_v: int = Field(..., ge=1, description="Tamaño de V")
    mode: Literal["affine", "oracle"]
    alphas: Optional[np.ndarray] = None
    betas: Optional[np.ndarray] = None
    absolute: bool = False
    oracle: Optional[Oraculo] = None
    hessian: Optional[OraculoHessiano] = None

    @field_validator("alphas", "betas", mode="before")
    @classmethod
    def validar_arreglos(cls, v):
        if v is None:
            return None
        return _arreglo_inmutable(v)

    @model_validator(mode="after")
    def validar_modo(self):
        if self.mode == "affine":
            if self.alphas is None or self.betas is None:
                raise ValueError("el modo afín requiere alphas y betas")
            if self.alphas.shape != (self.num_v,) or self.betas.shape != (self.num_v, self.n):
                raise ValueError("alphas debe ser (|V|,) y betas (|V|, n)")
            if not (np.all(np.isfinite(self.alphas)) and np.all(np.isfinite(self.betas))):
                raise ValueError("datos afines no finitos")
        elif self.oracle is None:
            raise ValueError("el modo oráculo requiere un oráculo")
        return self

    def evaluar(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Valores J(u, v) y subgradientes en u para todo v."""
        u = np.asarray(u, dtype=float)
        if self.mode == "oracle":
            valores, gradientes = self.oracle(u)
            return np.asarray(valores, dtype=float), np.asarray(gradientes, dtype=float)
        internos = self.alphas + self.betas @ u
        if not self.absolute:
            return internos, np.array(self.betas)
        signos = np.where(internos >= 0, 1.0, -1.0)
        return np.abs(internos), signos[:, np.newaxis] * self.betas


class OpcionesMinimax(BaseModel):
    """Opciones del solver minimax (solo el modo oráculo usa la mayoría)."""
    initial: Optional[List[float]] = Field(default=None, description="Punto inicial (centro de la caja)")
    box_radius: Optional[float] = Field(default=None, gt=0, description="Semiancho de la caja acotante")
    gap_tol: Optional[float] = Field(default=None, gt=0, description="Brecha absoluta objetivo")
    max_iter: Optional[int] = Field(default=None, ge=1, description="Iteraciones de planos cortantes")
    refine: bool = Field(default=True, description="Intentar el refinamiento de Newton sobre el soporte")


class MinimaxResult(BaseModel):
    """Minimizador u*, valor minimax, certificado de silla y diagnósticos."""
    u: List[float]
    value: float
    certificate: SaddleCertificate
    lower_bounds: List[float] = Field(default_factory=list)
    upper_bounds: List[float] = Field(default_factory=list)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def u_array(self) -> np.ndarray:
        return np.array(self.u, dtype=float)


def default_box_radius(centro: np.ndarray) -> float:
    """Semiancho por defecto: 10 veces la norma infinito del centro, mínimo 1."""
    return max(10.0 * float(np.abs(centro).max(initial=0.0)), 1.0)


# === SOPORTE (REDUCCIÓN DE CARATHÉODORY) ===


def extract_support(duals: Sequence[float], row_to_v: Sequence[int], n: int,
                    gradients: Optional[np.ndarray] = None,
                    signs: Optional[Sequence[int]] = None,
                    tol: float = 1e-8) -> List[SupportAtom]:
    """
    Extraer átomos de soporte con peso positivo a partir de pesos por fila.

    Filas que apuntan al mismo (v, signo) se fusionan. Si quedan más de n+1
    átomos, se eliminan uno a uno moviéndose sobre un vector del núcleo de
    [β^T; 1^T], lo que conserva Σλ_i β_i y Σλ_i hasta llegar a una solución
    básica con a lo sumo n+1 componentes positivas.

    Parameters
    ----------
    duals : Sequence[float]
        Pesos por fila (≥ 0 salvo ruido numérico)
    row_to_v : Sequence[int]
        Índice de V de cada fila
    n : int
        Dimensión de u
    gradients : Optional[np.ndarray]
        β de cada fila (filas × n); obligatorio si el soporte supera n+1
    signs : Optional[Sequence[int]]
        Signo de cada fila (envoltura de valor absoluto)
    tol : float
        Tolerancia para pesos negativos y para la suma

    Returns
    -------
    List[SupportAtom]
        Átomos con pesos positivos que suman uno

    Raises
    ------
    CertificateError
        Pesos negativos más allá de la tolerancia o suma nula
    """
    pesos = np.asarray(duals, dtype=float).reshape(-1)
    filas_v = np.asarray(row_to_v, dtype=int).reshape(-1)
    signos = np.ones(pesos.shape[0], dtype=int) if signs is None else np.asarray(signs, dtype=int)
    if filas_v.shape[0] != pesos.shape[0] or signos.shape[0] != pesos.shape[0]:
        raise ValueError("duals, row_to_v y signs deben tener la misma longitud")

    if np.any(pesos < -tol):
        raise CertificateError(f"duals inconsistent: peso negativo {pesos.min():.3e}")
    pesos = np.clip(pesos, 0.0, None)
    total = pesos.sum()
    if total <= tol:
        raise CertificateError("duals inconsistent: la suma de los pesos es cero")
    pesos = pesos / total

    # Fusionar filas equivalentes
    fusion: Dict[Tuple[int, int], int] = {}
    claves: List[Tuple[int, int]] = []
    acumulado: List[float] = []
    gradientes_fusion: List[np.ndarray] = []
    for fila in np.flatnonzero(pesos > 1e-14):
        clave = (int(filas_v[fila]), int(signos[fila]))
        if clave not in fusion:
            fusion[clave] = len(claves)
            claves.append(clave)
            acumulado.append(0.0)
            if gradients is not None:
                gradientes_fusion.append(np.asarray(gradients[fila], dtype=float))
        acumulado[fusion[clave]] += pesos[fila]

    lam = np.array(acumulado)
    if lam.shape[0] > n + 1:
        if gradients is None:
            raise ValueError("se requieren los gradientes para reducir el soporte a n+1 átomos")
        beta = np.array(gradientes_fusion)
        activos = np.arange(lam.shape[0])
        while activos.shape[0] > n + 1:
            sistema = np.vstack([beta[activos].T, np.ones(activos.shape[0])])
            nucleo = null_space(sistema)
            z = nucleo[:, 0]
            if not np.any(z > 1e-14):
                z = -z
            positivos = np.flatnonzero(z > 1e-14)
            razones = lam[activos[positivos]] / z[positivos]
            theta = razones.min()
            lam[activos] = lam[activos] - theta * z
            lam[activos[positivos[np.argmin(razones)]]] = 0.0
            activos = activos[lam[activos] > 1e-15]
        lam_final = np.zeros_like(lam)
        lam_final[activos] = lam[activos]
        lam = lam_final

    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    atomos = [
        SupportAtom(v=claves[i][0], weight=float(lam[i]), sign=claves[i][1])
        for i in np.flatnonzero(lam > 0)
    ]
    # Renormalizar en la lista final para que la suma sea uno en aritmética flotante
    total = sum(atomo.weight for atomo in atomos)
    return [SupportAtom(v=a.v, weight=a.weight / total, sign=a.sign) for a in atomos]


# === PROGRAMA DE PESOS (DUAL DEL EPÍGRAFO) ===


def _programa_pesos(alphas: np.ndarray, betas: np.ndarray,
                    lower: Optional[np.ndarray], upper: Optional[np.ndarray],
                    config: ConfiguracionNumerica) -> Tuple[LpResult, int]:
    """
    Resolver el epígrafo min t s.a. t ≥ α_r + β_r·u (lower ≤ u ≤ upper) por su dual:

        max Σ λ_r α_r + lower·g⁺ − upper·g⁻
        s.a. Σ λ_r β_r − g⁺ + g⁻ = 0,  Σ λ_r = 1,  λ, g± ≥ 0.

    Los multiplicadores de las n primeras filas son u*; el de la última es −t*.
    Una solución básica tiene a lo sumo n+1 pesos λ positivos.
    """
    filas, n = betas.shape
    con_caja = lower is not None
    columnas = filas + (2 * n if con_caja else 0)

    A = np.zeros((n + 1, columnas))
    A[:n, :filas] = betas.T
    A[n, :filas] = 1.0
    c = np.zeros(columnas)
    c[:filas] = -alphas
    if con_caja:
        A[:n, filas:filas + n] = -np.eye(n)
        A[:n, filas + n:] = np.eye(n)
        c[filas:filas + n] = -lower
        c[filas + n:] = upper

    b = np.zeros(n + 1)
    b[n] = 1.0
    resultado = solve_lp(LpProblem(c=c, A=A, b=b, senses=["="] * (n + 1)), config)
    return resultado, filas


def _filas_afines(inst: MinimaxInstance):
    """Filas del epígrafo: una por v, o dos (±) con envoltura de valor absoluto."""
    if not inst.absolute:
        indices = np.arange(inst.num_v)
        return np.array(inst.alphas), np.array(inst.betas), indices, np.ones(inst.num_v, dtype=int)
    alphas = np.concatenate([inst.alphas, -inst.alphas])
    betas = np.vstack([inst.betas, -inst.betas])
    indices = np.concatenate([np.arange(inst.num_v), np.arange(inst.num_v)])
    signos = np.concatenate([np.ones(inst.num_v, dtype=int), -np.ones(inst.num_v, dtype=int)])
    return alphas, betas, indices, signos


def _resolver_afin(inst: MinimaxInstance, config: ConfiguracionNumerica) -> MinimaxResult:
    inicio = time.time()
    alphas, betas, filas_v, signos = _filas_afines(inst)
    resultado, filas = _programa_pesos(alphas, betas, None, None, config)
    if resultado.status == "infeasible":
        raise UnboundedError("unbounded below: ninguna combinación convexa anula los gradientes")
    if not resultado.optimal:
        raise SolverError(f"programa de pesos terminó con estado {resultado.status}")

    multiplicadores = dual_multipliers(resultado)
    u = multiplicadores[:inst.n]
    valores, _ = inst.evaluar(u)
    valor = float(valores.max())

    atomos = extract_support(resultado.x[:filas], filas_v, inst.n, gradients=betas, signs=signos)
    certificado = SaddleCertificate(atoms=atomos, value=valor)
    logger.debug("Minimax afín: valor %.12g con %d átomos", valor, len(atomos))

    return MinimaxResult(
        u=u.tolist(),
        value=valor,
        certificate=certificado,
        lower_bounds=[-float(resultado.objective)],
        upper_bounds=[valor],
        diagnostics={
            "method": "epigraph_lp",
            "lp_iterations": resultado.iterations,
            "epigraph_value": -float(resultado.objective),
            "elapsed": time.time() - inicio,
        },
    )


# === PLANOS CORTANTES (KELLEY) CON REFINAMIENTO ===


def _hessianos(inst: MinimaxInstance, u: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Hessianos del oráculo o, en su defecto, diferencias centrales de gradientes."""
    if inst.hessian is not None:
        return np.asarray(inst.hessian(u, indices), dtype=float)
    paso = 1e-6 * max(1.0, float(np.abs(u).max(initial=0.0)))
    hessianos = np.zeros((indices.shape[0], inst.n, inst.n))
    for j in range(inst.n):
        e = np.zeros(inst.n)
        e[j] = paso
        _, g_mas = inst.evaluar(u + e)
        _, g_menos = inst.evaluar(u - e)
        hessianos[:, :, j] = (g_mas[indices] - g_menos[indices]) / (2 * paso)
    return 0.5 * (hessianos + np.transpose(hessianos, (0, 2, 1)))


def _refinar_kkt(inst: MinimaxInstance, u_inicial: np.ndarray, soporte: Dict[int, float],
                 max_pasos: int = 40) -> Optional[Tuple[np.ndarray, float, np.ndarray, np.ndarray]]:
    """
    Newton sobre el sistema KKT del soporte activo K:

        J_v(u) = t (v ∈ K),  Σ λ_v ∇J_v(u) = 0,  Σ λ_v = 1.

    Devuelve (u, t, índices K, λ_K) si converge, o None.
    """
    n = inst.n
    indices = np.array(sorted(soporte), dtype=int)
    lam = np.array([soporte[v] for v in indices], dtype=float)
    lam = lam / lam.sum()
    u = np.array(u_inicial, dtype=float)
    valores, _ = inst.evaluar(u)
    t = float(valores[indices].max())

    def residuo(u_, t_, lam_, idx_):
        valores_, gradientes_ = inst.evaluar(u_)
        return np.concatenate([
            valores_[idx_] - t_,
            gradientes_[idx_].T @ lam_,
            [lam_.sum() - 1.0],
        ]), valores_, gradientes_

    for _ in range(max_pasos):
        F, valores, gradientes = residuo(u, t, lam, indices)
        escala = max(1.0, abs(t), float(np.abs(gradientes[indices]).max(initial=0.0)))
        if np.abs(F).max() <= 1e-12 * escala:
            return u, t, indices, lam

        k = indices.shape[0]
        G = gradientes[indices]
        H = np.tensordot(lam, _hessianos(inst, u, indices), axes=(0, 0))
        jacobiano = np.zeros((k + n + 1, n + 1 + k))
        jacobiano[:k, :n] = G
        jacobiano[:k, n] = -1.0
        jacobiano[k:k + n, :n] = H
        jacobiano[k:k + n, n + 1:] = G.T
        jacobiano[k + n, n + 1:] = 1.0
        paso, *_ = np.linalg.lstsq(jacobiano, -F, rcond=None)

        norma = np.linalg.norm(F)
        alfa = 1.0
        while alfa > 1e-4:
            u_nuevo = u + alfa * paso[:n]
            t_nuevo = t + alfa * paso[n]
            lam_nuevo = lam + alfa * paso[n + 1:]
            F_nuevo, _, _ = residuo(u_nuevo, t_nuevo, lam_nuevo, indices)
            if np.linalg.norm(F_nuevo) <= (1 - 1e-4 * alfa) * norma:
                break
            alfa /= 2
        else:
            return None

        u, t, lam = u_nuevo, t_nuevo, lam_nuevo
        if np.any(lam <= 0):
            conservar = lam > 0
            if not np.any(conservar):
                return None
            indices, lam = indices[conservar], lam[conservar]
            lam = lam / lam.sum()

    F, _, gradientes = residuo(u, t, lam, indices)
    escala = max(1.0, abs(t), float(np.abs(gradientes[indices]).max(initial=0.0)))
    if np.abs(F).max() <= 1e-10 * escala:
        return u, t, indices, lam
    return None


def _pesos_en_punto(inst: MinimaxInstance, u: np.ndarray, valor: float, holgura: float,
                    config: ConfiguracionNumerica) -> List[SupportAtom]:
    """
    Pesos sobre los v casi activos en u que minimizan ‖Σ λ_v ∇J_v(u)‖∞.
    """
    valores, gradientes = inst.evaluar(u)
    activos = np.flatnonzero(valores >= valor - holgura)
    G = gradientes[activos]
    k, n = G.shape

    # Variables (λ_1..λ_k, w); filas ±Σλ g − w ≤ 0 y Σλ = 1
    A = np.zeros((2 * n + 1, k + 1))
    A[:n, :k] = G.T
    A[:n, k] = -1.0
    A[n:2 * n, :k] = -G.T
    A[n:2 * n, k] = -1.0
    A[2 * n, :k] = 1.0
    b = np.zeros(2 * n + 1)
    b[2 * n] = 1.0
    c = np.zeros(k + 1)
    c[k] = 1.0
    resultado = solve_lp(LpProblem(c=c, A=A, b=b, senses=["<="] * (2 * n) + ["="]), config)
    if not resultado.optimal:
        raise SolverError(f"no se pudieron calcular los pesos del certificado ({resultado.status})")
    return extract_support(resultado.x[:k], activos, n, gradients=G)


def _resolver_oraculo(inst: MinimaxInstance, opciones: OpcionesMinimax,
                      config: ConfiguracionNumerica) -> MinimaxResult:
    if opciones.initial is None:
        raise ValueError("el modo oráculo requiere un punto inicial")
    inicio = time.time()
    n = inst.n
    centro = np.array(opciones.initial, dtype=float)
    if centro.shape != (n,):
        raise ValueError(f"el punto inicial debe tener longitud {n}")
    radio = opciones.box_radius or default_box_radius(centro)
    gap_tol = opciones.gap_tol or config.gap_tol
    max_iter = opciones.max_iter or config.max_iter_kelley

    cortes_alfa: List[float] = []
    cortes_beta: List[np.ndarray] = []
    cortes_v: List[int] = []

    def agregar_cortes(u: np.ndarray, valores: np.ndarray, gradientes: np.ndarray, indices):
        for v in indices:
            cortes_alfa.append(float(valores[v] - gradientes[v] @ u))
            cortes_beta.append(np.array(gradientes[v]))
            cortes_v.append(int(v))

    valores, gradientes = inst.evaluar(centro)
    mejor_u, mejor_valor = centro.copy(), float(valores.max())
    agregar_cortes(centro, valores, gradientes, np.argsort(-valores, kind="stable")[:n + 1])

    cotas_inferiores: List[float] = []
    cotas_superiores: List[float] = []
    expansiones = 0
    refinado = None
    ultimo_intento = -10
    cota_inferior = -np.inf

    for iteracion in range(1, max_iter + 1):
        resultado, filas = _programa_pesos(
            np.array(cortes_alfa), np.array(cortes_beta), centro - radio, centro + radio, config
        )
        if not resultado.optimal:
            raise SolverError(f"el problema maestro terminó con estado {resultado.status}")
        multiplicadores = dual_multipliers(resultado)
        u_maestro = np.clip(multiplicadores[:n], centro - radio, centro + radio)
        cota_inferior = max(cota_inferior, -float(resultado.objective))

        valores, gradientes = inst.evaluar(u_maestro)
        if valores.max() < mejor_valor:
            mejor_u, mejor_valor = u_maestro.copy(), float(valores.max())
        cotas_inferiores.append(cota_inferior)
        cotas_superiores.append(mejor_valor)
        brecha = mejor_valor - cota_inferior
        escala = max(1.0, abs(mejor_valor))
        logger.debug("Kelley %d: inferior %.12g superior %.12g brecha %.3e", iteracion,
                     cota_inferior, mejor_valor, brecha)

        # Refinamiento de Newton sobre el soporte del maestro
        if opciones.refine and brecha <= 1e-2 * escala and iteracion - ultimo_intento >= 3:
            ultimo_intento = iteracion
            pesos_cortes = resultado.x[:filas]
            soporte: Dict[int, float] = {}
            for peso, v in zip(pesos_cortes, cortes_v):
                if peso > 1e-12:
                    soporte[v] = soporte.get(v, 0.0) + float(peso)
            if soporte:
                refinado = _intentar_refinamiento(inst, mejor_u, soporte, centro, radio, config)
                if refinado is not None:
                    u_ref, valor_ref, inferior_ref, atomos_ref = refinado
                    if valor_ref <= mejor_valor + 1e-12 * escala and valor_ref - inferior_ref <= gap_tol:
                        mejor_u, mejor_valor = u_ref, valor_ref
                        cotas_inferiores.append(max(inferior_ref, cota_inferior))
                        cotas_superiores.append(mejor_valor)
                        logger.info("Refinamiento KKT aceptado en la iteración %d", iteracion)
                        certificado = SaddleCertificate(atoms=atomos_ref, value=mejor_valor)
                        return _resultado_oraculo(mejor_u, mejor_valor, certificado, cotas_inferiores,
                                                  cotas_superiores, iteracion, expansiones, True, inicio)
                    refinado = None

        if brecha <= gap_tol:
            en_borde = np.any(np.abs(mejor_u - centro) >= radio * (1 - 1e-9))
            if not en_borde:
                break
            expansiones += 1
            if expansiones > config.max_expansiones_caja:
                raise SolverError(
                    "box boundary hit after max expansions",
                    diagnostics={"radius": radio, "expansions": expansiones},
                )
            radio *= 2.0
            # Las cotas previas solo valían en la caja anterior
            cota_inferior = -np.inf
            cotas_inferiores.clear()
            cotas_superiores.clear()
            logger.info("Caja acotante duplicada a radio %.3g (expansión %d)", radio, expansiones)

        agregar_cortes(u_maestro, valores, gradientes, np.argsort(-valores, kind="stable")[:n + 1])
    else:
        raise IterationLimitError(
            f"planos cortantes sin converger en {max_iter} iteraciones",
            diagnostics={"lower_bound": cota_inferior, "upper_bound": mejor_valor,
                         "gap": mejor_valor - cota_inferior, "iterations": max_iter},
        )

    holgura = max(10 * gap_tol, 1e-9 * max(1.0, abs(mejor_valor)))
    atomos = _pesos_en_punto(inst, mejor_u, mejor_valor, holgura, config)
    certificado = SaddleCertificate(atoms=atomos, value=mejor_valor)
    return _resultado_oraculo(mejor_u, mejor_valor, certificado, cotas_inferiores, cotas_superiores,
                              iteracion, expansiones, False, inicio)


def _intentar_refinamiento(inst: MinimaxInstance, u: np.ndarray, soporte: Dict[int, float],
                           centro: np.ndarray, radio: float, config: ConfiguracionNumerica):
    """
    Refinar y certificar: devuelve (u, valor, cota inferior, átomos) o None.

    La cota inferior Σλ_v J_v(u) − ‖Σλ_v ∇J_v(u)‖₁ · 2·radio vale en toda la
    caja por convexidad.
    """
    n = inst.n
    if len(soporte) > n + 1:
        _, gradientes = inst.evaluar(u)
        indices = np.array(sorted(soporte), dtype=int)
        atomos = extract_support([soporte[v] for v in indices], indices, n, gradients=gradientes[indices])
        soporte = {a.v: a.weight for a in atomos}

    salida = _refinar_kkt(inst, u, soporte)
    if salida is None:
        return None
    u_ref, t, indices, lam = salida
    if np.any(np.abs(u_ref - centro) >= radio):
        return None

    valores, gradientes = inst.evaluar(u_ref)
    valor = float(valores.max())
    agregado = gradientes[indices].T @ lam
    inferior = float(lam @ valores[indices]) - float(np.abs(agregado).sum()) * 2 * radio
    atomos = extract_support(lam, indices, n, gradients=gradientes[indices])
    return u_ref, valor, inferior, atomos


def _resultado_oraculo(u, valor, certificado, inferiores, superiores, iteraciones, expansiones,
                       refinado, inicio) -> MinimaxResult:
    return MinimaxResult(
        u=np.asarray(u, dtype=float).tolist(),
        value=float(valor),
        certificate=certificado,
        lower_bounds=inferiores,
        upper_bounds=superiores,
        diagnostics={
            "method": "cutting_plane",
            "iterations": iteraciones,
            "box_expansions": expansiones,
            "refined": refinado,
            "gap": float(superiores[-1] - inferiores[-1]) if inferiores else None,
            "elapsed": time.time() - inicio,
        },
    )


def solve_minimax(inst: MinimaxInstance, opts: Optional[OpcionesMinimax] = None,
                  config: Optional[ConfiguracionNumerica] = None) -> MinimaxResult:
    """
    Resolver min_u max_v J(u, v) y devolver un certificado de silla.

    En modo afín se resuelve un único programa lineal de epígrafo (a través
    de su dual de pesos). En modo oráculo se ejecutan planos cortantes de
    Kelley dentro de una caja que se duplica (hasta 5 veces) si la solución
    queda en el borde, con un refinamiento de Newton sobre el soporte que
    cierra la brecha en problemas suaves.

    Parameters
    ----------
    inst : MinimaxInstance
        Instancia afín u oráculo
    opts : Optional[OpcionesMinimax]
        Punto inicial, caja, brecha e iteraciones
    config : Optional[ConfiguracionNumerica]
        Tolerancias globales

    Returns
    -------
    MinimaxResult
        u*, valor minimax, certificado y diagnósticos

    Raises
    ------
    UnboundedError
        Si el objetivo no está acotado inferiormente
    IterationLimitError
        Si se agotan las iteraciones
    SolverError
        Si la solución queda en el borde tras las expansiones permitidas
    """
    config = config or CONFIG_DEFECTO
    opts = opts or OpcionesMinimax()
    if inst.mode == "affine":
        return _resolver_afin(inst, config)
    return _resolver_oraculo(inst, opts, config)


# === VERIFICACIÓN DE LA CONDICIÓN DE SILLA ===


def verify_saddle(inst: MinimaxInstance, u: Sequence[float], cert: SaddleCertificate,
                  tol: Optional[float] = None,
                  config: Optional[ConfiguracionNumerica] = None) -> ReporteVerificacion:
    """
    Verificar la condición de silla de un certificado.

    (L) max_v J(u*, v) ≤ Σ λ_i J(u*, v_i) + tol: basta con sondas de un solo
        átomo porque el lado izquierdo es afín en las mezclas μ.
    (R) optimalidad de primer orden de u ↦ Σ λ_i J(u, v_i) en u*: norma
        infinito del gradiente agregado ≤ tol.

    Returns
    -------
    ReporteVerificacion
        Condiciones "soporte", "(L)" y "(R)" con sus residuos
    """
    tol = tol if tol is not None else (config or CONFIG_DEFECTO).tol_saddle
    u = np.asarray(u, dtype=float)
    reporte = ReporteVerificacion(subject="saddle")
    reporte.agregar("soporte", max(0, cert.k - (inst.n + 1)), 0.0, detail=f"k = {cert.k}, n+1 = {inst.n + 1}")

    valores, gradientes = inst.evaluar(u)
    indices = np.array([a.v for a in cert.atoms], dtype=int)
    pesos = np.array([a.weight for a in cert.atoms])
    if np.any(indices >= inst.num_v):
        reporte.agregar("(L)", np.inf, tol, detail="átomo fuera de V")
        return reporte

    mezcla = float(pesos @ valores[indices])
    reporte.agregar("(L)", max(0.0, float(valores.max()) - mezcla), tol,
                    detail=f"max_v J = {valores.max():.12g}, Σλ J = {mezcla:.12g}")

    if inst.mode == "affine":
        signos = np.array([a.sign for a in cert.atoms], dtype=float)
        agregado = (pesos * signos) @ inst.betas[indices]
    else:
        agregado = pesos @ gradientes[indices]
    reporte.agregar("(R)", float(np.abs(agregado).max(initial=0.0)), tol,
                    detail="‖Σ λ_i ∇J(u*, v_i)‖∞")
    return reporte
