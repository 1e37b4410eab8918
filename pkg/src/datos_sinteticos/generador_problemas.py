# ./src/datos_sinteticos/generador_problemas.py

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.bsa.models import (
    Basis, DomainGrid, FunctionFamily, MeasureGrid, ParameterGrid, SampledProblem
)
from src.bsa.problem import dump_problem


def norma_recomendada(problem: SampledProblem) -> str:
    """'lp' si el problema trae medida, 'uniform' en otro caso."""
    return "lp" if problem.measure is not None else "uniform"


class GeneradorProblemas:
    """
    Generador del corpus de problemas de aproximación simultánea.

    Cubre codominios d ∈ {1, 2}, exponentes p ∈ {1, 1.5, 2, 3} y bases con
    n ∈ {1, 2, 3}:
    - Reducción clásica: x² desde {1, x} en 1001 puntos de [−1, 1]
    - Familias simétricas {x, −x} contra constantes (uniforme y L²)
    - Familias paramétricas e^{ax} y familias con envoltura convexa
    - Curvas planas (d = 2) con norma euclídea
    """

    def __init__(self, seed: int = 42):
        """
        Inicializar el generador.

        Parameters
        ----------
        seed : int, default=42
            Semilla para las familias aleatorias
        """
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @staticmethod
    def malla_intervalo(num_puntos: int, inicio: float = -1.0, fin: float = 1.0) -> np.ndarray:
        return np.linspace(inicio, fin, num_puntos)

    @staticmethod
    def base_polinomial(x: np.ndarray, grado: int) -> np.ndarray:
        """Monomios 1, x, ..., x^grado tabulados (n × |X|)."""
        return np.vstack([x ** j for j in range(grado + 1)])

    @staticmethod
    def construir(nombre: str, x: np.ndarray, familia: Dict[str, np.ndarray], base: np.ndarray,
                  pesos: Optional[np.ndarray] = None, p: Optional[float] = None,
                  interval: bool = True) -> SampledProblem:
        """
        Armar un SampledProblem a partir de tablas numpy.

        Parameters
        ----------
        nombre : str
            Nombre del problema
        x : np.ndarray
            Coordenadas de los puntos (|X|) o (|X| × dim)
        familia : Dict[str, np.ndarray]
            Etiqueta → tabla (|X|) o (|X| × d)
        base : np.ndarray
            Tabla n × |X| (× d)
        pesos, p : opcionales
            Medida discreta y exponente para la norma L^p
        interval : bool
            Si la malla es un intervalo ordenado
        """
        etiquetas = [f"x{i:04d}" for i in range(len(x))]
        etiquetas_a = list(familia)
        valores = np.array([familia[a] for a in etiquetas_a], dtype=float)
        medida = None
        if pesos is not None:
            medida = MeasureGrid(point_labels=etiquetas, weights=pesos, p=p)
        return SampledProblem(
            name=nombre,
            domain=DomainGrid(labels=etiquetas, coords=np.asarray(x, dtype=float), interval=interval),
            family=FunctionFamily(params=ParameterGrid(labels=etiquetas_a), point_labels=etiquetas, values=valores),
            basis=Basis(point_labels=etiquetas, values=np.asarray(base, dtype=float)),
            measure=medida,
        )

    # === INSTANCIAS UNIFORMES (d = 1) ===

    def chebyshev_x2(self, num_puntos: int = 1001) -> SampledProblem:
        x = self.malla_intervalo(num_puntos)
        return self.construir("chebyshev_x2", x, {"x2": x ** 2}, self.base_polinomial(x, 1))

    def simetrica_constantes(self, num_puntos: int = 201) -> SampledProblem:
        x = self.malla_intervalo(num_puntos)
        return self.construir("simetrica_constantes", x, {"mas_x": x, "menos_x": -x}, self.base_polinomial(x, 0))

    def exponencial_parametrica(self, num_puntos: int = 101) -> SampledProblem:
        x = self.malla_intervalo(num_puntos, 0.0, 1.0)
        familia = {f"a={a:g}": np.exp(a * x) for a in (0.0, 0.25, 0.5, 0.75, 1.0)}
        return self.construir("exponencial_parametrica", x, familia, self.base_polinomial(x, 2))

    def envoltura_tres(self, num_puntos: int = 101) -> SampledProblem:
        x = self.malla_intervalo(num_puntos)
        familia = {"seno": np.sin(np.pi * x / 2), "cubica": x ** 3, "valor_absoluto": np.abs(x)}
        return self.construir("envoltura_tres", x, familia, self.base_polinomial(x, 1))

    def valor_absoluto_n3(self, num_puntos: int = 201) -> SampledProblem:
        x = self.malla_intervalo(num_puntos)
        return self.construir("valor_absoluto_n3", x, {"abs": np.abs(x)}, self.base_polinomial(x, 2))

    def aleatoria_n1(self, num_puntos: int = 61, num_funciones: int = 4) -> SampledProblem:
        """Combinaciones aleatorias de cosenos contra constantes."""
        x = self.malla_intervalo(num_puntos)
        familia = {}
        for i in range(num_funciones):
            amplitudes = self.rng.normal(size=3)
            familia[f"aleatoria_{i}"] = sum(amp * np.cos((k + 1) * x) for k, amp in enumerate(amplitudes))
        return self.construir("aleatoria_n1", x, familia, self.base_polinomial(x, 0))

    # === INSTANCIAS L^p ===

    def simetrica_l2(self) -> SampledProblem:
        x = np.array([-1.0, 0.0, 1.0])
        return self.construir("simetrica_l2", x, {"mas_x": x, "menos_x": -x}, self.base_polinomial(x, 0),
                              pesos=np.ones(3), p=2.0)

    def exponencial_lp(self, p: float, num_puntos: int = 41) -> SampledProblem:
        x = self.malla_intervalo(num_puntos)
        familia = {f"a={a:g}": np.exp(a * x) for a in (-1.0, 0.0, 1.0)}
        pesos = np.full(num_puntos, 2.0 / num_puntos)
        return self.construir(f"exponencial_p{p:g}".replace(".", "_"), x, familia,
                              self.base_polinomial(x, 1), pesos=pesos, p=p)

    def minimos_cuadrados(self, num_puntos: int = 31) -> SampledProblem:
        """Una sola función con p = 2: la BSA es la proyección ortogonal."""
        x = self.malla_intervalo(num_puntos, 0.0, 2.0)
        pesos = 0.5 + self.rng.random(num_puntos)
        return self.construir("minimos_cuadrados", x, {"exp": np.exp(x)}, self.base_polinomial(x, 2),
                              pesos=pesos, p=2.0)

    def potencias_p3(self, num_puntos: int = 41) -> SampledProblem:
        x = self.malla_intervalo(num_puntos)
        pesos = np.full(num_puntos, 1.0 / num_puntos)
        familia = {"x2": x ** 2, "abs": np.abs(x), "x4": x ** 4}
        return self.construir("potencias_p3", x, familia, self.base_polinomial(x, 1), pesos=pesos, p=3.0)

    # === CURVAS PLANAS (d = 2) ===

    def circulo_d2(self, num_puntos: int = 51) -> SampledProblem:
        """Arcos (cos ax, sin ax) contra desplazamientos constantes del plano."""
        x = self.malla_intervalo(num_puntos, 0.0, 1.0)
        familia = {f"a={a:g}": np.stack([np.cos(a * x), np.sin(a * x)], axis=1) for a in (1.0, 2.0)}
        base = np.zeros((2, num_puntos, 2))
        base[0, :, 0] = 1.0
        base[1, :, 1] = 1.0
        return self.construir("circulo_d2", x, familia, base)

    def curvas_d2_n3(self, num_puntos: int = 41) -> SampledProblem:
        x = self.malla_intervalo(num_puntos, 0.0, 1.0)
        familia = {f"a={a:g}": np.stack([a * x ** 2, (1 - a) * np.sqrt(x)], axis=1) for a in (0.0, 0.5, 1.0)}
        base = np.zeros((3, num_puntos, 2))
        base[0, :, 0] = 1.0
        base[1, :, 1] = 1.0
        base[2, :, 0] = x
        base[2, :, 1] = x
        return self.construir("curvas_d2_n3", x, familia, base)

    # === CORPUS ===

    def corpus(self) -> Dict[str, SampledProblem]:
        """Corpus completo, en orden fijo."""
        problemas: List[SampledProblem] = [
            self.chebyshev_x2(),
            self.simetrica_constantes(),
            self.exponencial_parametrica(),
            self.envoltura_tres(),
            self.valor_absoluto_n3(),
            self.aleatoria_n1(),
            self.simetrica_l2(),
            self.exponencial_lp(1.0),
            self.exponencial_lp(1.5),
            self.exponencial_lp(2.0),
            self.minimos_cuadrados(),
            self.potencias_p3(),
            self.circulo_d2(),
            self.curvas_d2_n3(),
        ]
        return {problema.name: problema for problema in problemas}

    def guardar_corpus(self, directorio: str = "data/corpus", nombres: Optional[Sequence[str]] = None) -> List[Path]:
        """Escribir cada problema del corpus como archivo JSON."""
        directorio = Path(directorio)
        directorio.mkdir(parents=True, exist_ok=True)
        rutas = []
        for nombre, problema in self.corpus().items():
            if nombres is not None and nombre not in nombres:
                continue
            rutas.append(dump_problem(problema, directorio / f"{nombre}.json"))
        return rutas
