from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationInfo, field_validator, model_validator

from src.bsa.configuracion import CONFIG_DEFECTO


def _arreglo_inmutable(valor: Any) -> np.ndarray:
    """Copiar a un arreglo float64 de solo lectura."""
    arreglo = np.array(valor, dtype=float)
    arreglo.setflags(write=False)
    return arreglo


def _indice_etiquetas(etiquetas: List[str], que: str) -> Dict[str, int]:
    indice = {}
    for posicion, etiqueta in enumerate(etiquetas):
        if etiqueta in indice:
            raise ValueError(f"duplicate label: '{etiqueta}' ({que})")
        indice[etiqueta] = posicion
    return indice


def rango_numerico(matriz: np.ndarray, tol_relativa: Optional[float] = None) -> int:
    """
    Rango numérico por valores singulares.

    Los valores singulares menores que `tol_relativa` veces el mayor cuentan
    como cero (por defecto `rank_tol` de la configuración).
    """
    if tol_relativa is None:
        tol_relativa = CONFIG_DEFECTO.rank_tol
    if matriz.size == 0:
        return 0
    singulares = np.linalg.svd(matriz, compute_uv=False)
    if singulares[0] == 0.0:
        return 0
    return int(np.sum(singulares > tol_relativa * singulares[0]))


class ModeloInmutable(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# === MODELO DEL PROBLEMA DISCRETIZADO ===


class DomainGrid(ModeloInmutable):
    """
    Malla finita del dominio X.

    Cada punto tiene una etiqueta única y un vector de coordenadas. Si
    `interval` es verdadero los puntos provienen de un intervalo 1-D y sus
    coordenadas deben ser estrictamente crecientes.
    """
    labels: List[str] = Field(..., description="Etiquetas únicas de los puntos")
    coords: np.ndarray = Field(..., description="Coordenadas, una fila por punto")
    interval: bool = Field(default=False, description="Puntos ordenados de un intervalo 1-D")

    _indice: Dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("coords", mode="before")
    @classmethod
    def validar_coords(cls, v):
        arreglo = np.array(v, dtype=float)
        if arreglo.ndim == 1:
            arreglo = arreglo.reshape(-1, 1)
        if arreglo.ndim != 2:
            raise ValueError("coords debe ser una tabla puntos × dimensión")
        if not np.all(np.isfinite(arreglo)):
            raise ValueError("coords contiene valores no finitos")
        return _arreglo_inmutable(arreglo)

    @model_validator(mode="after")
    def validar_malla(self):
        if len(self.labels) == 0:
            raise ValueError("la malla del dominio está vacía")
        if self.coords.shape[0] != len(self.labels):
            raise ValueError("coords y labels tienen longitudes distintas")
        _indice_etiquetas(self.labels, "domain_points")
        if self.interval:
            if self.coords.shape[1] != 1:
                raise ValueError("una malla de intervalo debe ser unidimensional")
            if np.any(np.diff(self.coords[:, 0]) <= 0):
                raise ValueError("interval: las coordenadas deben ser estrictamente crecientes")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._indice = {etiqueta: i for i, etiqueta in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        """Posición de un punto; `KeyError` si la etiqueta no existe."""
        if label not in self._indice:
            raise KeyError(f"unknown point label: '{label}'")
        return self._indice[label]

    def subset(self, labels: List[str]) -> "DomainGrid":
        """Submalla con los puntos indicados, en el orden dado."""
        posiciones = [self.index(etiqueta) for etiqueta in labels]
        return DomainGrid(labels=list(labels), coords=self.coords[posiciones], interval=False)


class ParameterGrid(ModeloInmutable):
    """
    Conjunto finito de parámetros A (la compacidad se realiza como finitud).
    """
    labels: List[str] = Field(..., description="Etiquetas únicas de los parámetros")
    coords: Optional[np.ndarray] = Field(default=None, description="Coordenadas opcionales")

    _indice: Dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("coords", mode="before")
    @classmethod
    def validar_coords(cls, v):
        if v is None:
            return None
        arreglo = np.array(v, dtype=float)
        if arreglo.ndim == 1:
            arreglo = arreglo.reshape(-1, 1)
        return _arreglo_inmutable(arreglo)

    @model_validator(mode="after")
    def validar_parametros(self):
        if len(self.labels) == 0:
            raise ValueError("empty family: se requiere al menos un parámetro")
        _indice_etiquetas(self.labels, "params")
        if self.coords is not None and self.coords.shape[0] != len(self.labels):
            raise ValueError("coords de parámetros y labels tienen longitudes distintas")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._indice = {etiqueta: i for i, etiqueta in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        if label not in self._indice:
            raise KeyError(f"unknown param label: '{label}'")
        return self._indice[label]


class FunctionFamily(ModeloInmutable):
    """
    Familia {f_a} tabulada: `values[a, x]` es un vector de R^d.
    """
    params: ParameterGrid = Field(..., description="Parámetros de la familia")
    point_labels: List[str] = Field(..., description="Puntos del dominio, en orden de columnas")
    values: np.ndarray = Field(..., description="Tabla |A| × |X| × d")
    codomain_norm: Literal["euclidean", "absolute"] = Field(default="euclidean", description="Norma de Y")

    @field_validator("values", mode="before")
    @classmethod
    def validar_valores(cls, v):
        arreglo = np.array(v, dtype=float)
        if arreglo.ndim == 2:
            arreglo = arreglo[:, :, np.newaxis]
        if arreglo.ndim != 3:
            raise ValueError("la tabla de la familia debe ser |A| × |X| × d")
        if not np.all(np.isfinite(arreglo)):
            raise ValueError("la tabla de la familia contiene valores no finitos")
        return _arreglo_inmutable(arreglo)

    @model_validator(mode="after")
    def validar_familia(self):
        esperado = (self.params.size, len(self.point_labels))
        if self.values.shape[:2] != esperado:
            raise ValueError(f"missing table entries: familia {self.values.shape[:2]} ≠ {esperado}")
        if self.values.shape[2] < 1:
            raise ValueError("codomain_dim debe ser ≥ 1")
        if self.codomain_norm == "absolute" and self.values.shape[2] != 1:
            raise ValueError("la norma 'absolute' solo aplica con codomain_dim = 1")
        return self

    @property
    def d(self) -> int:
        return int(self.values.shape[2])


class Basis(ModeloInmutable):
    """
    Base tabulada de H: `values[j, x]` ∈ R^d para j = 1..n.
    """
    point_labels: List[str] = Field(..., description="Puntos del dominio, en orden de columnas")
    values: np.ndarray = Field(..., description="Tabla n × |X| × d")

    _indice: Dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("values", mode="before")
    @classmethod
    def validar_valores(cls, v):
        arreglo = np.array(v, dtype=float)
        if arreglo.ndim == 2:
            arreglo = arreglo[:, :, np.newaxis]
        if arreglo.ndim != 3 or arreglo.shape[0] < 1:
            raise ValueError("la base debe ser una tabla n × |X| × d con n ≥ 1")
        if not np.all(np.isfinite(arreglo)):
            raise ValueError("la base contiene valores no finitos")
        return _arreglo_inmutable(arreglo)

    @model_validator(mode="after")
    def validar_base(self):
        if self.values.shape[1] != len(self.point_labels):
            raise ValueError("missing table entries: la base no cubre todos los puntos")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._indice = {etiqueta: i for i, etiqueta in enumerate(self.point_labels)}

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[2])

    def index(self, label: str) -> int:
        if label not in self._indice:
            raise KeyError(f"unknown point label: '{label}'")
        return self._indice[label]

    def matrix(self) -> np.ndarray:
        """Matriz (|X|·d) × n con una columna por elemento de la base."""
        n, puntos, d = self.values.shape
        return self.values.reshape(n, puntos * d).T


class Coefficients(ModeloInmutable):
    """Vector de coeficientes c ∈ R^n de f = Σ c_j h_j."""
    c: np.ndarray = Field(..., description="Coeficientes")
    optimal: bool = Field(default=False, description="Marcado como BSA")

    @field_validator("c", mode="before")
    @classmethod
    def validar_c(cls, v):
        arreglo = np.array(v, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arreglo)):
            raise ValueError("coeficientes no finitos")
        return _arreglo_inmutable(arreglo)

    @property
    def n(self) -> int:
        return int(self.c.shape[0])


class MeasureGrid(ModeloInmutable):
    """
    Espacio de medida finito (S, m) con exponente p ∈ [1, ∞).
    """
    point_labels: List[str] = Field(..., description="Puntos de S")
    weights: np.ndarray = Field(..., description="Pesos m_s > 0")
    p: float = Field(..., description="Exponente p ≥ 1")

    @field_validator("weights", mode="before")
    @classmethod
    def validar_pesos(cls, v):
        arreglo = np.array(v, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arreglo)) or np.any(arreglo <= 0):
            raise ValueError("non-positive measure weight")
        return _arreglo_inmutable(arreglo)

    @field_validator("p")
    @classmethod
    def validar_p(cls, v):
        if not np.isfinite(v) or v < 1:
            raise ValueError("el exponente p debe estar en [1, ∞)")
        return float(v)

    @model_validator(mode="after")
    def validar_medida(self):
        if self.weights.shape[0] != len(self.point_labels):
            raise ValueError("missing table entries: pesos y puntos de la medida difieren")
        return self

    @property
    def q(self) -> float:
        """Exponente conjugado; ∞ cuando p = 1."""
        if self.p == 1.0:
            return float("inf")
        return self.p / (self.p - 1.0)


class SampledProblem(ModeloInmutable):
    """
    Problema discretizado completo: X, A, {f_a}, H y opcionalmente (S, m, p).

    La aproximación obtenida es exacta sobre la malla; refinarla es
    responsabilidad de quien construye el problema.
    """
    domain: DomainGrid
    family: FunctionFamily
    basis: Basis
    measure: Optional[MeasureGrid] = None
    name: str = Field(default="problema", description="Nombre descriptivo")

    @model_validator(mode="after")
    def validar_problema(self, info: ValidationInfo):
        if self.family.point_labels != self.domain.labels:
            raise ValueError("missing table entries: la familia no está tabulada sobre la malla")
        if self.basis.point_labels != self.domain.labels:
            raise ValueError("missing table entries: la base no está tabulada sobre la malla")
        if self.basis.d != self.family.d:
            raise ValueError("la base y la familia tienen codominios distintos")
        if self.domain.size < self.basis.n + 1:
            raise ValueError(f"se requieren al menos n+1 = {self.basis.n + 1} puntos en el dominio")
        tol_rango = (info.context or {}).get("rank_tol")
        if rango_numerico(self.basis.matrix(), tol_rango) < self.basis.n:
            raise ValueError(f"basis rank < n (n = {self.basis.n})")
        if self.measure is not None and self.measure.point_labels != self.domain.labels:
            raise ValueError("missing table entries: la medida debe cubrir todos los puntos del dominio")
        return self

    @property
    def params(self) -> ParameterGrid:
        return self.family.params

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def d(self) -> int:
        return self.family.d


# === CERTIFICADOS ===


class SupportAtom(BaseModel):
    """Átomo de soporte (v_i, λ_i) del certificado de silla."""
    v: int = Field(..., ge=0, description="Índice en V")
    weight: float = Field(..., gt=0, le=1 + 1e-12, description="Peso λ_i")
    sign: int = Field(default=1, description="Signo de la fila (envoltura de valor absoluto)")

    @field_validator("sign")
    @classmethod
    def validar_signo(cls, v):
        if v not in (-1, 1):
            raise ValueError("sign debe ser ±1")
        return v


class SaddleCertificate(BaseModel):
    """Átomos con pesos positivos que suman uno y el valor minimax certificado."""
    atoms: List[SupportAtom]
    value: float

    @model_validator(mode="after")
    def validar_pesos(self):
        if not self.atoms:
            raise ValueError("el certificado necesita al menos un átomo")
        total = sum(atomo.weight for atomo in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"los pesos deben sumar 1 (suman {total!r})")
        return self

    @property
    def k(self) -> int:
        return len(self.atoms)


class ParPunto(BaseModel):
    param: str
    point: str


class UniformCertificate(BaseModel):
    """
    Certificado de la norma uniforme: pares (a_i, x_i), pesos λ_i, direcciones
    unitarias de los residuos u_i (signos σ_i cuando d = 1) y desviación δ.
    """
    pairs: List[ParPunto]
    lambdas: List[float]
    directions: List[List[float]]
    delta: float = Field(..., ge=0)
    degenerate: bool = False

    @model_validator(mode="after")
    def validar_certificado(self):
        k = len(self.pairs)
        if k == 0 or len(self.lambdas) != k or len(self.directions) != k:
            raise ValueError("pairs, lambdas y directions deben tener la misma longitud k ≥ 1")
        if any(lam <= 0 for lam in self.lambdas):
            raise ValueError("todos los pesos λ_i deben ser positivos")
        if abs(sum(self.lambdas) - 1.0) > 1e-12:
            raise ValueError("los pesos λ_i deben sumar 1")
        for direccion in self.directions:
            if abs(float(np.linalg.norm(direccion)) - 1.0) > 1e-10:
                raise ValueError("cada dirección debe ser unitaria")
        return self

    @property
    def k(self) -> int:
        return len(self.pairs)


class DualFunction(ModeloInmutable):
    """Funcional dual g ∈ L^q sobre la malla de medida."""
    point_labels: List[str]
    values: np.ndarray
    p: float

    @field_validator("values", mode="before")
    @classmethod
    def validar_valores(cls, v):
        return _arreglo_inmutable(np.array(v, dtype=float).reshape(-1))

    @property
    def q(self) -> float:
        return float("inf") if self.p == 1.0 else self.p / (self.p - 1.0)

    def as_dict(self) -> Dict[str, float]:
        return {etiqueta: float(valor) for etiqueta, valor in zip(self.point_labels, self.values)}


class LpCertificate(BaseModel):
    """
    Certificado L^p: parámetros a_i, funcionales duales g_i, pesos λ_i y la
    desviación máxima certificada.
    """
    params: List[str]
    lambdas: List[float]
    duals: List[Dict[str, float]]
    p: float
    value: float = Field(..., ge=0)
    degenerate: bool = False

    @model_validator(mode="after")
    def validar_certificado(self):
        k = len(self.params)
        if k == 0 or len(self.lambdas) != k or len(self.duals) != k:
            raise ValueError("params, lambdas y duals deben tener la misma longitud k ≥ 1")
        if any(lam <= 0 for lam in self.lambdas):
            raise ValueError("todos los pesos λ_i deben ser positivos")
        if abs(sum(self.lambdas) - 1.0) > 1e-12:
            raise ValueError("los pesos λ_i deben sumar 1")
        return self

    @property
    def k(self) -> int:
        return len(self.params)


class Solution(BaseModel):
    """
    Resultado de un solver BSA: coeficientes c*, valor objetivo, certificado
    y diagnósticos del solver.
    """
    norm: Literal["uniform", "lp"]
    coefficients: List[float]
    value: float
    certificate: Union[UniformCertificate, LpCertificate]
    saddle: Optional[SaddleCertificate] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def c(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=float)

    @property
    def k(self) -> int:
        return self.certificate.k


# === REPORTES ===


class CondicionVerificada(BaseModel):
    """Resultado de una condición individual de un verificador."""
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""


class ReporteVerificacion(BaseModel):
    """Reporte por condición; nunca lanza excepciones por condiciones fallidas."""
    subject: str
    checks: List[CondicionVerificada] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(condicion.passed for condicion in self.checks)

    def agregar(self, name: str, residual: float, tolerance: float, detail: str = "") -> CondicionVerificada:
        residual = float(residual)
        condicion = CondicionVerificada(
            name=name,
            residual=residual,
            tolerance=float(tolerance),
            passed=bool(np.isfinite(residual) and residual <= tolerance),
            detail=detail,
        )
        self.checks.append(condicion)
        return condicion

    def condicion(self, name: str) -> CondicionVerificada:
        for condicion in self.checks:
            if condicion.name == name:
                return condicion
        raise KeyError(name)

    def fallidas(self) -> List[str]:
        return [condicion.name for condicion in self.checks if not condicion.passed]

    def tabla(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{
                "condicion": c.name,
                "residuo": c.residual,
                "tolerancia": c.tolerance,
                "estado": "OK" if c.passed else "FALLA",
                "detalle": c.detail,
            } for c in self.checks]
        )


class ReporteDefinicion(BaseModel):
    """Comprobación aleatoria de la definición de BSA alrededor de c*."""
    trials: int
    radius: float
    seed: int
    value: float
    best_competitor: float
    min_slack: float
    failures: int
    slack_tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return self.failures == 0


class SubconjuntoHaar(BaseModel):
    points: List[str]
    determinant: float
    threshold: float
    passed: bool


class ReporteHaar(BaseModel):
    subsets: List[SubconjuntoHaar] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.subsets)

    def testigos(self) -> List[List[str]]:
        """Subconjuntos que prueban que la base no es de Haar en la malla."""
        return [s.points for s in self.subsets if not s.passed]


class UnicityData(BaseModel):
    """Constante de unicidad fuerte γ y los datos del certificado que la definen."""
    gamma: float = Field(..., gt=0)
    sigma: List[int]
    points: List[str]
    delta: float = Field(..., gt=0)
    vertices: List[List[float]] = Field(default_factory=list)
    vertex_norms: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def validar_datos(self):
        if len(set(self.points)) != len(self.points):
            raise ValueError("los puntos del certificado deben ser distintos")
        if any(s not in (-1, 1) for s in self.sigma):
            raise ValueError("cada σ_i debe ser ±1")
        if len(self.sigma) != len(self.points):
            raise ValueError("sigma y points tienen longitudes distintas")
        return self


class ReporteUnicidad(BaseModel):
    """Validación empírica de la desigualdad de unicidad fuerte."""
    gamma: float
    vertices: List[List[float]]
    min_ratio: float
    min_slack: float
    trials: int
    seed: int
    violations: int
    ratio_tol: float = 1e-8
    slack_tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.min_ratio >= self.gamma - self.ratio_tol


class ReporteAlternancia(BaseModel):
    """Signos de los puntos de soporte ordenados sobre el intervalo."""
    points: List[str]
    coords: List[float]
    signs: List[int]
    alternating: bool


class RunConfig(BaseModel):
    """
    Configuración de una ejecución de la línea de comandos.
    """
    command: Literal["solve", "verify", "gamma", "hull", "report"]
    problem_path: str
    solution_path: Optional[str] = None
    norm: Literal["uniform", "lp"] = "uniform"
    tol: Optional[float] = Field(default=None, gt=0)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    trials: int = Field(default=1000, ge=1)
    hull_resolution: int = Field(default=4, ge=1)
    out_path: Optional[str] = None
    csv_path: Optional[str] = None
    config_path: Optional[str] = None

    @model_validator(mode="after")
    def validar_campos_requeridos(self):
        if self.command in ("verify", "gamma", "report") and not self.solution_path:
            raise ValueError(f"el comando '{self.command}' requiere un archivo de solución")
        if self.command == "report" and not self.csv_path:
            raise ValueError("el comando 'report' requiere --csv")
        return self
