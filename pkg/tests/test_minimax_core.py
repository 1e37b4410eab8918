# ./tests/test_minimax_core.py

import numpy as np
import pytest
from scipy.optimize import linprog

from src.bsa.configuracion import ConfiguracionNumerica
from src.bsa.errores import CertificateError, UnboundedError
from src.bsa.minimax_core import (
    MinimaxInstance, OpcionesMinimax, default_box_radius, extract_support, solve_minimax, verify_saddle
)
from src.bsa.models import SaddleCertificate, SupportAtom


@pytest.fixture
def distancia_absoluta():
    """J(u, v) = |u − v| con V = {0, 1}."""
    return MinimaxInstance(n=1, num_v=2, mode="affine", alphas=[0.0, -1.0], betas=[[1.0], [1.0]], absolute=True)


def _cuadratica():
    """J(u) = ‖u‖² con un solo v."""
    def oraculo(u):
        return np.array([float(u @ u)]), np.array([2.0 * u])
    return MinimaxInstance(n=2, num_v=1, mode="oracle", oracle=oraculo)


class TestSolverAfin:

    def test_distancia_absoluta(self, distancia_absoluta):
        resultado = solve_minimax(distancia_absoluta)
        assert resultado.u[0] == pytest.approx(0.5, abs=1e-12)
        assert resultado.value == pytest.approx(0.5, abs=1e-12)
        atomos = {(a.v, a.sign): a.weight for a in resultado.certificate.atoms}
        assert atomos == pytest.approx({(0, 1): 0.5, (1, -1): 0.5})
        assert resultado.diagnostics["method"] == "epigraph_lp"

    def test_certificado_pasa_la_verificacion(self, distancia_absoluta):
        resultado = solve_minimax(distancia_absoluta)
        reporte = verify_saddle(distancia_absoluta, resultado.u, resultado.certificate, tol=1e-8)
        assert reporte.passed

    def test_pesos_alterados(self, distancia_absoluta):
        resultado = solve_minimax(distancia_absoluta)
        alterados = SaddleCertificate(
            atoms=[SupportAtom(v=0, weight=0.9, sign=1), SupportAtom(v=1, weight=0.1, sign=-1)],
            value=resultado.value,
        )
        reporte = verify_saddle(distancia_absoluta, resultado.u, alterados, tol=1e-8)
        assert not reporte.passed
        assert reporte.condicion("(R)").residual == pytest.approx(0.8)

    def test_tolerancia_desde_la_configuracion(self, distancia_absoluta):
        resultado = solve_minimax(distancia_absoluta)
        alterados = SaddleCertificate(
            atoms=[SupportAtom(v=0, weight=0.9, sign=1), SupportAtom(v=1, weight=0.1, sign=-1)],
            value=resultado.value,
        )
        holgada = ConfiguracionNumerica(tol_saddle=1.0)
        reporte = verify_saddle(distancia_absoluta, resultado.u, alterados, config=holgada)
        assert reporte.condicion("(R)").tolerance == 1.0
        assert reporte.passed
        assert not verify_saddle(distancia_absoluta, resultado.u, alterados).passed

    def test_objetivo_independiente_de_u(self):
        instancia = MinimaxInstance(n=1, num_v=3, mode="affine", alphas=[1.0, 3.0, 2.0], betas=np.zeros((3, 1)))
        resultado = solve_minimax(instancia)
        assert resultado.value == pytest.approx(3.0)
        assert [(a.v, a.weight) for a in resultado.certificate.atoms] == [(1, pytest.approx(1.0))]
        assert verify_saddle(instancia, resultado.u, resultado.certificate).passed

    def test_no_acotado(self):
        # max(u, 2u) no tiene mínimo
        instancia = MinimaxInstance(n=1, num_v=2, mode="affine", alphas=[0.0, 0.0], betas=[[1.0], [2.0]])
        with pytest.raises(UnboundedError, match="unbounded below"):
            solve_minimax(instancia)

    def test_dimensiones_validadas(self):
        with pytest.raises(ValueError):
            MinimaxInstance(n=2, num_v=2, mode="affine", alphas=[0.0, 1.0], betas=[[1.0], [2.0]])

    @pytest.mark.parametrize("semilla", range(50))
    def test_aleatorios_contra_busqueda_en_malla(self, semilla):
        generador = np.random.default_rng(semilla)
        n = int(generador.integers(1, 3))
        num_v = int(generador.integers(n + 1, 7))
        betas = generador.normal(size=(num_v, n))
        # El último gradiente equilibra a los demás: 0 ∈ conv(β) y el mínimo existe
        betas[-1] = -betas[:-1].sum(axis=0)
        alphas = generador.normal(size=num_v)
        instancia = MinimaxInstance(n=n, num_v=num_v, mode="affine", alphas=alphas, betas=betas)

        resultado = solve_minimax(instancia)
        assert resultado.certificate.k <= n + 1
        assert verify_saddle(instancia, resultado.u, resultado.certificate, tol=1e-7).passed

        # Epígrafo resuelto por un solver independiente
        referencia = linprog(
            np.r_[np.zeros(n), 1.0], A_ub=np.c_[betas, -np.ones(num_v)], b_ub=-alphas,
            bounds=[(None, None)] * (n + 1), method="highs",
        )
        assert resultado.value == pytest.approx(referencia.fun, abs=1e-8)

        # Búsqueda en malla alrededor del minimizador (el objetivo es convexo)
        ejes = [np.linspace(ui - 0.05, ui + 0.05, 501) for ui in resultado.u]
        malla = np.stack(np.meshgrid(*ejes, indexing="ij"), axis=-1).reshape(-1, n)
        minimo_malla = float((alphas[np.newaxis, :] + malla @ betas.T).max(axis=1).min())
        assert resultado.value <= minimo_malla + 1e-9
        assert minimo_malla <= resultado.value + 1e-3


class TestExtraccionDeSoporte:

    def test_soporte_ya_reducido(self):
        atomos = extract_support([0.5, 0.5], [3, 7], n=1)
        assert [(a.v, a.weight) for a in atomos] == [(3, 0.5), (7, 0.5)]

    def test_un_solo_peso(self):
        atomos = extract_support([0.0, 1.0, 0.0], [0, 1, 2], n=2)
        assert len(atomos) == 1
        assert atomos[0].v == 1 and atomos[0].weight == pytest.approx(1.0)

    def test_reduccion_de_cuatro_filas(self):
        gradientes = np.array([[1.0], [-1.0], [2.0], [-2.0]])
        atomos = extract_support([0.25] * 4, [0, 1, 2, 3], n=1, gradients=gradientes)
        assert len(atomos) <= 2
        pesos = np.array([a.weight for a in atomos])
        assert pesos.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(pesos > 0)
        agregado = sum(a.weight * gradientes[a.v, 0] for a in atomos)
        assert abs(agregado) <= 1e-8

    def test_filas_repetidas_se_fusionan(self):
        atomos = extract_support([0.25, 0.25, 0.5], [4, 4, 9], n=1, signs=[1, 1, -1])
        assert {(a.v, a.sign): a.weight for a in atomos} == pytest.approx({(4, 1): 0.5, (9, -1): 0.5})

    def test_pesos_renormalizados(self):
        atomos = extract_support([2.0, 6.0], [0, 1], n=1)
        assert [a.weight for a in atomos] == pytest.approx([0.25, 0.75])

    def test_pesos_negativos(self):
        with pytest.raises(CertificateError, match="duals inconsistent"):
            extract_support([0.7, -0.3], [0, 1], n=1)

    def test_faltan_gradientes(self):
        with pytest.raises(ValueError):
            extract_support([0.25] * 4, [0, 1, 2, 3], n=1)


class TestPlanosCortantes:

    def test_cuadratica(self):
        resultado = solve_minimax(_cuadratica(), OpcionesMinimax(initial=[0.5, -0.3]))
        np.testing.assert_allclose(resultado.u, [0.0, 0.0], atol=1e-6)
        assert resultado.value == pytest.approx(0.0, abs=1e-9)
        assert resultado.certificate.k == 1
        assert resultado.diagnostics["method"] == "cutting_plane"

    def test_cotas_validas_y_monotonas(self):
        # J(u) = max(u1 − 1, −u1, u2 − 2, 1 − u2): mínimo −0.5 en (0.5, 1.5)
        alphas = np.array([-1.0, 0.0, -2.0, 1.0])
        betas = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])

        def oraculo(u):
            return alphas + betas @ u, betas.copy()

        instancia = MinimaxInstance(n=2, num_v=4, mode="oracle", oracle=oraculo)
        resultado = solve_minimax(instancia, OpcionesMinimax(initial=[0.5, 1.0], refine=False))
        superiores = np.array(resultado.upper_bounds)
        inferiores = np.array(resultado.lower_bounds)
        assert np.all(np.diff(superiores) <= 0)
        assert np.all(np.diff(inferiores) >= 0)
        assert np.all(inferiores <= -0.5 + 1e-12)
        assert superiores[-1] - inferiores[-1] <= 1e-9
        assert resultado.value == pytest.approx(-0.5, abs=1e-9)
        assert resultado.diagnostics["box_expansions"] == 0

    def test_cotas_monotonas_tras_expandir_la_caja(self):
        def oraculo(u):
            return np.array([abs(u[0] - 7.0)]), np.array([[np.sign(u[0] - 7.0)]])

        instancia = MinimaxInstance(n=1, num_v=1, mode="oracle", oracle=oraculo)
        resultado = solve_minimax(instancia, OpcionesMinimax(initial=[0.0], refine=False))
        inferiores = np.array(resultado.lower_bounds)
        assert resultado.diagnostics["box_expansions"] == 3
        assert np.all(np.diff(inferiores) >= 0)
        assert np.all(inferiores <= 1e-12)
        assert np.all(np.diff(resultado.upper_bounds) <= 0)
        assert resultado.value == pytest.approx(0.0, abs=1e-9)
        assert resultado.u[0] == pytest.approx(7.0, abs=1e-9)

    def test_coincide_con_el_programa_lineal(self, distancia_absoluta):
        def oraculo(u):
            return distancia_absoluta.evaluar(u)
        instancia = MinimaxInstance(n=1, num_v=2, mode="oracle", oracle=oraculo)
        resultado = solve_minimax(instancia, OpcionesMinimax(initial=[3.0]))
        assert resultado.value == pytest.approx(0.5, abs=1e-8)
        assert verify_saddle(instancia, resultado.u, resultado.certificate, tol=1e-7).passed

    def test_requiere_punto_inicial(self):
        with pytest.raises(ValueError):
            solve_minimax(_cuadratica())

    def test_radio_por_defecto(self):
        assert default_box_radius(np.array([0.0, 0.0])) == 1.0
        assert default_box_radius(np.array([0.5, -3.0])) == 30.0
