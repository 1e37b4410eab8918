# ./src/bsa/lp_solver.py

import logging
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator
from scipy.linalg import lu_factor, lu_solve

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica
from src.bsa.errores import (
    InfeasibleError, IterationLimitError, SingularBasisError, SolverError, UnboundedError
)
from src.bsa.models import ModeloInmutable, _arreglo_inmutable

logger = logging.getLogger(__name__)

Sentido = Literal["<=", "=", ">="]

# Pivoteos entre refactorizaciones de la base
REFACTORIZAR_CADA = 50


class LpProblem(ModeloInmutable):
    """
    Programa lineal denso: minimizar c·x sujeto a A x (≤, =, ≥) b y
    lower ≤ x ≤ upper. Las cotas pueden ser infinitas.
    """
    c: np.ndarray = Field(..., description="Vector objetivo (m)")
    A: np.ndarray = Field(..., description="Matriz de restricciones (r × m)")
    b: np.ndarray = Field(..., description="Lado derecho (r)")
    senses: List[Sentido] = Field(..., description="Sentido de cada fila")
    lower: Optional[np.ndarray] = Field(default=None, description="Cotas inferiores (0 por defecto)")
    upper: Optional[np.ndarray] = Field(default=None, description="Cotas superiores (∞ por defecto)")

    @field_validator("c", "b", mode="before")
    @classmethod
    def validar_vector(cls, v):
        return _arreglo_inmutable(np.array(v, dtype=float).reshape(-1))

    @field_validator("A", mode="before")
    @classmethod
    def validar_matriz(cls, v):
        return _arreglo_inmutable(np.atleast_2d(np.array(v, dtype=float)))

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def validar_cotas(cls, v):
        if v is None:
            return None
        return _arreglo_inmutable(np.array(v, dtype=float).reshape(-1))

    @model_validator(mode="after")
    def validar_dimensiones(self):
        m = self.c.shape[0]
        r = len(self.senses)
        if self.A.shape != (r, m) or self.b.shape[0] != r:
            if not (r == 0 and self.A.size == 0):
                raise ValueError(f"dimensiones inconsistentes: A {self.A.shape}, b {self.b.shape}, c {self.c.shape}")
        for nombre, arreglo in (("c", self.c), ("A", self.A), ("b", self.b)):
            if not np.all(np.isfinite(arreglo)):
                raise ValueError(f"{nombre} contiene valores no finitos")
        for nombre, cota in (("lower", self.lower), ("upper", self.upper)):
            if cota is not None and cota.shape[0] != m:
                raise ValueError(f"{nombre} debe tener longitud {m}")
        if self.lower is not None and np.any(np.isposinf(self.lower)):
            raise ValueError("lower no puede ser +∞")
        if self.upper is not None and np.any(np.isneginf(self.upper)):
            raise ValueError("upper no puede ser −∞")
        return self

    @property
    def num_vars(self) -> int:
        return int(self.c.shape[0])

    @property
    def num_rows(self) -> int:
        return len(self.senses)

    def cotas(self) -> Tuple[np.ndarray, np.ndarray]:
        m = self.num_vars
        lower = np.zeros(m) if self.lower is None else np.array(self.lower)
        upper = np.full(m, np.inf) if self.upper is None else np.array(self.upper)
        return lower, upper


class LpResult(ModeloInmutable):
    """
    Resultado del símplex: estado, solución primal, multiplicadores duales
    por fila y la base final.

    Convención de signos de los duales (problema de minimización): y_i ≤ 0
    en filas ≤, y_i ≥ 0 en filas ≥, libre en filas =; c·x* = b·y* + (cotas).
    """
    status: Literal["optimal", "infeasible", "unbounded"]
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    duals: Optional[np.ndarray] = None
    bound_duals: Optional[np.ndarray] = None
    dual_objective: Optional[float] = None
    basis: List[int] = Field(default_factory=list)
    iterations: int = 0
    phase_one: bool = False
    primal_residual: float = 0.0
    complementarity: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class LpTableau:
    """
    Tabla densa del símplex en forma estándar con contabilidad de la base.

    La última fila guarda los costos reducidos y el negativo del objetivo; la
    última columna el lado derecho. Cada fila arranca con una columna
    identidad (holgura o artificial) que se conserva para leer los duales.
    Cada `REFACTORIZAR_CADA` pivoteos, y al terminar, la tabla se recalcula
    desde la matriz original con una factorización LU de la base.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, columnas_identidad: np.ndarray,
                 artificiales: np.ndarray, config: ConfiguracionNumerica):
        self.num_filas, self.num_columnas = A.shape
        self.A_original = np.array(A, dtype=float)
        self.b_original = np.array(b, dtype=float)
        self.T = np.zeros((self.num_filas + 1, self.num_columnas + 1))
        self.T[:-1, :-1] = A
        self.T[:-1, -1] = b
        self.base = np.array(columnas_identidad, dtype=int)
        self.columnas_identidad = np.array(columnas_identidad, dtype=int)
        self.es_artificial = np.zeros(self.num_columnas, dtype=bool)
        self.es_artificial[artificiales] = True
        self.config = config
        self.iteraciones = 0
        self.costos = np.zeros(self.num_columnas)

    def fijar_objetivo(self, costos: np.ndarray):
        """Reescribir la fila objetivo para la base actual."""
        self.costos = np.array(costos, dtype=float)
        costos_base = self.costos[self.base]
        self.T[-1, :-1] = self.costos - costos_base @ self.T[:-1, :-1]
        self.T[-1, -1] = -costos_base @ self.T[:-1, -1]
        self.T[-1, self.base] = 0.0
        self.tol_costos = self.config.comp_tol * max(1.0, float(np.abs(self.costos).max(initial=0.0)))

    def refactorizar(self):
        """
        Recalcular B⁻¹[A | b] y la fila objetivo desde los datos originales.

        Raises
        ------
        SingularBasisError
            Si la base actual es numéricamente singular
        """
        if self.num_filas == 0:
            return
        B = self.A_original[:, self.base]
        lu, pivotes = lu_factor(B, check_finite=False)
        diagonal = np.abs(np.diag(lu))
        if diagonal.min() <= self.config.pivot_tol * max(1.0, float(diagonal.max())):
            raise SingularBasisError(
                f"base numéricamente singular al refactorizar (|u_ii| mínimo {diagonal.min():.3e})",
                diagnostics={"iterations": self.iteraciones},
            )
        self.T[:-1, :-1] = lu_solve((lu, pivotes), self.A_original, check_finite=False)
        lado_derecho = lu_solve((lu, pivotes), self.b_original, check_finite=False)
        escala = max(1.0, float(np.abs(self.b_original).max(initial=0.0)))
        # Ruido de redondeo bajo cero en variables básicas degeneradas
        ruido = (lado_derecho < 0) & (lado_derecho >= -self.config.feas_tol * escala)
        self.T[:-1, -1] = np.where(ruido, 0.0, lado_derecho)
        self.T[:-1, self.base] = np.eye(self.num_filas)
        self.fijar_objetivo(self.costos)

    def pivotear(self, fila: int, columna: int):
        pivote = self.T[fila, columna]
        if abs(pivote) <= self.config.pivot_tol:
            raise SingularBasisError(f"pivote numéricamente nulo ({pivote:.3e}) en ({fila}, {columna})")
        self.T[fila] /= pivote
        factores = self.T[:, columna].copy()
        factores[fila] = 0.0
        self.T -= np.outer(factores, self.T[fila])
        self.T[:, columna] = 0.0
        self.T[fila, columna] = 1.0
        self.base[fila] = columna
        self.iteraciones += 1
        if self.iteraciones % REFACTORIZAR_CADA == 0:
            self.refactorizar()

    def iterar(self, permitidas: np.ndarray, limite: int) -> str:
        """
        Iterar con la regla de Bland hasta optimalidad o no acotamiento.

        Returns
        -------
        str
            "optimal" o "unbounded"
        """
        inicio = self.iteraciones
        while True:
            costos_reducidos = self.T[-1, :-1]
            candidatas = np.flatnonzero(permitidas & (costos_reducidos < -self.tol_costos))
            if candidatas.size == 0:
                return "optimal"
            columna = int(candidatas[0])

            direccion = self.T[:-1, columna]
            positivas = np.flatnonzero(direccion > self.config.pivot_tol)
            if positivas.size == 0:
                return "unbounded"

            razones = self.T[positivas, -1] / direccion[positivas]
            minima = razones.min()
            empatadas = positivas[razones <= minima + 1e-12 * max(1.0, abs(minima))]
            fila = int(empatadas[np.argmin(self.base[empatadas])])

            self.pivotear(fila, columna)
            if self.iteraciones - inicio > limite:
                raise IterationLimitError(
                    f"símplex sin converger tras {limite} pivoteos",
                    diagnostics={"iterations": self.iteraciones, "rows": self.num_filas,
                                 "columns": self.num_columnas},
                )

    def expulsar_artificiales(self):
        """Sacar de la base las artificiales en nivel cero tras la fase 1."""
        for fila in range(self.num_filas):
            if not self.es_artificial[self.base[fila]]:
                continue
            fila_tabla = self.T[fila, :-1]
            reales = np.flatnonzero(~self.es_artificial & (np.abs(fila_tabla) > self.config.pivot_tol))
            if reales.size:
                self.pivotear(fila, int(reales[0]))
            else:
                logger.debug("Fila %d redundante: la artificial permanece en nivel cero", fila)

    def solucion(self) -> np.ndarray:
        x = np.zeros(self.num_columnas)
        x[self.base] = self.T[:-1, -1]
        return x

    def duales(self) -> np.ndarray:
        """y_i = −(costo reducido de la columna identidad de la fila i)."""
        return -self.T[-1, self.columnas_identidad]


def _forma_estandar(p: LpProblem):
    """
    Llevar el problema a min c'·x' s.a. A' x' (sentidos) b', x' ≥ 0.

    Returns
    -------
    tuple
        (A', b', c', sentidos, transformacion, desplazamiento, filas_cota)
    """
    lower, upper = p.cotas()
    m = p.num_vars

    columnas = []
    desplazamiento = np.zeros(m)
    filas_cota = []
    for j in range(m):
        if np.isfinite(lower[j]):
            desplazamiento[j] = lower[j]
            columnas.append((j, 1.0))
            if np.isfinite(upper[j]):
                filas_cota.append((j, len(columnas) - 1, upper[j] - lower[j]))
        elif np.isfinite(upper[j]):
            desplazamiento[j] = upper[j]
            columnas.append((j, -1.0))
        else:
            columnas.append((j, 1.0))
            columnas.append((j, -1.0))

    transformacion = np.zeros((m, len(columnas)))
    for k, (j, signo) in enumerate(columnas):
        transformacion[j, k] = signo

    A = p.A @ transformacion if p.num_rows else np.zeros((0, len(columnas)))
    b = p.b - (p.A @ desplazamiento if p.num_rows else 0.0)
    sentidos = list(p.senses)

    if filas_cota:
        filas = np.zeros((len(filas_cota), len(columnas)))
        for i, (_, k, ancho) in enumerate(filas_cota):
            filas[i, k] = 1.0
        A = np.vstack([A, filas])
        b = np.concatenate([b, [ancho for _, _, ancho in filas_cota]])
        sentidos += ["<="] * len(filas_cota)

    c = transformacion.T @ p.c
    return A, b, c, sentidos, transformacion, desplazamiento, filas_cota


def solve_lp(p: LpProblem, config: Optional[ConfiguracionNumerica] = None) -> LpResult:
    """
    Resolver un programa lineal denso con el símplex primal de dos fases.

    La regla de Bland (columna entrante y fila saliente de menor índice)
    garantiza terminación; el número de pivoteos queda acotado por
    C(filas + columnas, columnas) de la forma estándar.

    Parameters
    ----------
    p : LpProblem
        Programa a resolver
    config : Optional[ConfiguracionNumerica]
        Tolerancias (pivote 1e-10, factibilidad 1e-9)

    Returns
    -------
    LpResult
        Estado, primal, duales por fila y base final

    Raises
    ------
    IterationLimitError
        Si se supera el límite de pivoteos
    SingularBasisError
        Si la base final reproduce mal el sistema (pérdida de precisión)
    """
    config = config or CONFIG_DEFECTO
    A, b, c, sentidos, transformacion, desplazamiento, filas_cota = _forma_estandar(p)
    r, m = A.shape

    # Filas con lado derecho no negativo
    volteadas = b < 0
    A[volteadas] *= -1.0
    b = np.where(volteadas, -b, b)
    sentidos = [
        {"<=": ">=", ">=": "<=", "=": "="}[s] if volteada else s
        for s, volteada in zip(sentidos, volteadas)
    ]

    holguras = []
    artificiales = []
    identidad = np.zeros(r, dtype=int)
    columnas_extra = []
    for i, sentido in enumerate(sentidos):
        e = np.zeros(r)
        e[i] = 1.0
        if sentido == "<=":
            columnas_extra.append(e)
            identidad[i] = m + len(columnas_extra) - 1
            holguras.append(identidad[i])
        elif sentido == ">=":
            columnas_extra.append(-e)
            columnas_extra.append(e)
            identidad[i] = m + len(columnas_extra) - 1
            artificiales.append(identidad[i])
        else:
            columnas_extra.append(e)
            identidad[i] = m + len(columnas_extra) - 1
            artificiales.append(identidad[i])

    extra = np.column_stack(columnas_extra) if columnas_extra else np.zeros((r, 0))
    A_std = np.hstack([A, extra])
    tabla = LpTableau(A_std, b, identidad, np.array(artificiales, dtype=int), config)
    num_columnas = A_std.shape[1]
    costos = np.concatenate([c, np.zeros(num_columnas - m)])

    fase_uno = len(artificiales) > 0
    if fase_uno:
        costos_fase_uno = np.zeros(num_columnas)
        costos_fase_uno[artificiales] = 1.0
        tabla.fijar_objetivo(costos_fase_uno)
        tabla.iterar(np.ones(num_columnas, dtype=bool), config.max_iter_simplex)
        inviabilidad = -tabla.T[-1, -1]
        if inviabilidad > config.feas_tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            logger.debug("Fase 1 terminó con inviabilidad %.3e", inviabilidad)
            return LpResult(status="infeasible", iterations=tabla.iteraciones, phase_one=True,
                            basis=tabla.base.tolist())
        tabla.expulsar_artificiales()

    tabla.fijar_objetivo(costos)
    estado = tabla.iterar(~tabla.es_artificial, config.max_iter_simplex)
    # La base final se refactoriza; si la tabla limpia revela costos reducidos
    # negativos se sigue pivoteando desde ella
    for _ in range(3):
        if estado != "optimal":
            break
        antes = tabla.iteraciones
        tabla.refactorizar()
        estado = tabla.iterar(~tabla.es_artificial, config.max_iter_simplex)
        if tabla.iteraciones == antes:
            break
    if estado == "unbounded":
        return LpResult(status="unbounded", iterations=tabla.iteraciones, phase_one=fase_uno,
                        basis=tabla.base.tolist())

    x_std = tabla.solucion()
    x_prima = x_std[:m]
    x = desplazamiento + transformacion @ x_prima
    objetivo = float(p.c @ x)

    residuo = float(np.abs(A_std @ x_std - b).max(initial=0.0))
    escala = max(1.0, float(np.abs(b).max(initial=0.0)))
    if residuo > 1e-6 * escala:
        raise SingularBasisError(
            f"la base final reproduce el sistema con residuo {residuo:.3e}",
            diagnostics={"iterations": tabla.iteraciones},
        )

    holgura_complementaria = float(np.abs(x_std * tabla.T[-1, :-1]).max(initial=0.0))
    if holgura_complementaria > config.comp_tol * escala * max(1.0, float(np.abs(costos).max(initial=0.0))):
        raise SingularBasisError(
            f"holgura complementaria violada ({holgura_complementaria:.3e})",
            diagnostics={"iterations": tabla.iteraciones},
        )

    y = tabla.duales()
    y = np.where(volteadas, -y, y)
    constante = float(p.c @ desplazamiento)
    objetivo_dual = float(y @ np.where(volteadas, -b, b)) + constante

    duales = y[:p.num_rows]
    duales_cota = np.zeros(p.num_vars)
    for i, (j, _, _) in enumerate(filas_cota):
        duales_cota[j] = y[p.num_rows + i]

    logger.debug("Símplex óptimo: objetivo %.12g, %d pivoteos", objetivo, tabla.iteraciones)
    return LpResult(
        status="optimal",
        x=x,
        objective=objetivo,
        duals=duales,
        bound_duals=duales_cota,
        dual_objective=objetivo_dual,
        basis=tabla.base.tolist(),
        iterations=tabla.iteraciones,
        phase_one=fase_uno,
        primal_residual=residuo,
        complementarity=holgura_complementaria,
    )


def dual_multipliers(r: LpResult) -> np.ndarray:
    """
    Multiplicadores duales y* de un resultado óptimo (uno por fila original).

    Raises
    ------
    InfeasibleError
        Si el programa es infactible
    UnboundedError
        Si el programa no está acotado
    SolverError
        Si el resultado no trae duales
    """
    if r.status == "infeasible":
        raise InfeasibleError("dual_multipliers: el programa es infactible", diagnostics={"iterations": r.iterations})
    if r.status == "unbounded":
        raise UnboundedError("dual_multipliers: el programa no está acotado", diagnostics={"iterations": r.iterations})
    if r.duals is None:
        raise SolverError("dual_multipliers requiere un resultado óptimo con duales")
    return np.array(r.duals)
