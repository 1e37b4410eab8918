# ./tests/test_lp_bsa.py

import numpy as np
import pytest

from src.bsa.errores import ProblemError
from src.bsa.lp_bsa import (
    dual_norm, lp_deviation, lp_norm, norming_functional, residual_lp_norms, solve_lp_bsa,
    verify_lp_certificate
)
from src.bsa.models import LpCertificate, MeasureGrid
from src.bsa.uniform_bsa import verify_bsa_by_definition
from tests.utilidades import problema_escalar


def _medida(pesos, p):
    pesos = np.asarray(pesos, dtype=float)
    return MeasureGrid(point_labels=[f"s{i}" for i in range(pesos.shape[0])], weights=pesos, p=p)


@pytest.fixture(scope="module")
def solucion_simetrica_l2(simetrica_l2):
    return solve_lp_bsa(simetrica_l2)


class TestNormas:

    def test_tabla_nula(self, medida_tres_puntos):
        assert lp_norm(np.zeros(3), medida_tres_puntos) == 0.0

    def test_p2(self, medida_tres_puntos):
        assert lp_norm([1.0, -2.0, 1.0], medida_tres_puntos) == pytest.approx(np.sqrt(6.0))

    def test_p1_con_pesos(self):
        assert lp_norm([1.0, -1.0], _medida([2.0, 3.0], 1.0)) == pytest.approx(5.0)

    def test_norma_dual_p1_es_el_maximo(self):
        assert dual_norm([0.5, -0.75], _medida([2.0, 3.0], 1.0)) == 0.75

    def test_norma_dual_conjugada(self):
        medida = _medida([1.0, 1.0], 3.0)
        assert dual_norm([1.0, 1.0], medida) == pytest.approx(2.0 ** (2.0 / 3.0))


class TestFuncionalNormante:

    def test_p2(self, medida_tres_puntos):
        r = np.array([1.0, -2.0, 1.0])
        g = norming_functional(r, medida_tres_puntos)
        np.testing.assert_allclose(g.values, r / np.sqrt(6.0))
        assert float(g.values @ r) == pytest.approx(np.sqrt(6.0), abs=1e-12)

    def test_p1(self):
        medida = _medida([1.0, 1.0], 1.0)
        g = norming_functional(np.array([1.0, -1.0]), medida)
        np.testing.assert_array_equal(g.values, [1.0, -1.0])
        assert g.as_dict() == {"s0": 1.0, "s1": -1.0}

    def test_p1_signo_de_cero(self):
        g = norming_functional(np.array([0.0, 2.0]), _medida([1.0, 1.0], 1.0))
        np.testing.assert_array_equal(g.values, [0.0, 1.0])

    def test_p3(self):
        g = norming_functional(np.array([2.0, 0.0]), _medida([1.0, 1.0], 3.0))
        np.testing.assert_allclose(g.values, [1.0, 0.0])

    def test_residuo_nulo(self, medida_tres_puntos):
        with pytest.raises(ValueError, match="zero residual"):
            norming_functional(np.zeros(3), medida_tres_puntos)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.5])
    def test_pareo_y_holder(self, p):
        generador = np.random.default_rng(int(p * 10))
        for _ in range(2000):
            tamano = int(generador.integers(1, 12))
            medida = _medida(generador.uniform(0.1, 2.0, size=tamano), p)
            r = generador.normal(size=tamano)
            g = norming_functional(r, medida)
            pareo = float(np.sum(medida.weights * g.values * r))
            assert pareo == pytest.approx(lp_norm(r, medida), abs=1e-10 * max(1.0, lp_norm(r, medida)))
            assert dual_norm(g.values, medida) <= 1.0 + 1e-12

            # Hölder con un g arbitrario proyectado a la bola unidad de L^q
            otro = generador.normal(size=tamano)
            otro = otro / max(1.0, dual_norm(otro, medida))
            assert np.sum(medida.weights * otro * r) <= lp_norm(r, medida) + 1e-10


class TestSolver:

    def test_familia_simetrica(self, solucion_simetrica_l2):
        assert solucion_simetrica_l2.value == pytest.approx(np.sqrt(2.0), abs=1e-9)
        assert solucion_simetrica_l2.c[0] == pytest.approx(0.0, abs=1e-8)
        assert solucion_simetrica_l2.norm == "lp"

    def test_certificado_simetrico_pasa(self, simetrica_l2, solucion_simetrica_l2):
        reporte = verify_lp_certificate(simetrica_l2, solucion_simetrica_l2.c, solucion_simetrica_l2.certificate,
                                        tol=1e-8)
        assert reporte.passed

    def test_certificado_construido_a_mano(self, simetrica_l2):
        g = np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0)
        certificado = LpCertificate(
            params=["mas_x", "menos_x"], lambdas=[0.5, 0.5],
            duals=[dict(zip(simetrica_l2.domain.labels, g)), dict(zip(simetrica_l2.domain.labels, -g))],
            p=2.0, value=np.sqrt(2.0),
        )
        reporte = verify_lp_certificate(simetrica_l2, [0.0], certificado, tol=1e-12)
        assert reporte.passed
        assert reporte.condicion("(i)").residual == 0.0

        anulado = certificado.model_copy(update={"duals": [{s: 0.0 for s in simetrica_l2.domain.labels},
                                                           certificado.duals[1]]})
        reporte = verify_lp_certificate(simetrica_l2, [0.0], anulado, tol=1e-8)
        assert not reporte.condicion("(ii)").passed
        assert reporte.condicion("(ii)").residual == pytest.approx(np.sqrt(2.0))

    def test_minimos_cuadrados(self, generador):
        problema = generador.minimos_cuadrados()
        solucion = solve_lp_bsa(problema)
        B = problema.basis.values[:, :, 0].T
        W = np.diag(problema.measure.weights)
        f = problema.family.values[0, :, 0]
        proyeccion = np.linalg.solve(B.T @ W @ B, B.T @ W @ f)
        np.testing.assert_allclose(solucion.c, proyeccion, atol=1e-8)
        assert solucion.certificate.k == 1
        assert verify_lp_certificate(problema, solucion.c, solucion.certificate, tol=1e-8).passed

    def test_funcion_en_el_subespacio(self):
        x = np.linspace(-1, 1, 7)
        problema = problema_escalar(x, {"recta": 2 - x}, [np.ones(7), x], pesos=np.ones(7), p=2.0)
        solucion = solve_lp_bsa(problema)
        assert solucion.value == pytest.approx(0.0, abs=1e-10)
        assert solucion.certificate.degenerate

    @pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
    def test_exponenciales(self, generador, p):
        problema = generador.exponencial_lp(p)
        solucion = solve_lp_bsa(problema)
        assert solucion.certificate.k <= problema.n + 1
        assert verify_lp_certificate(problema, solucion.c, solucion.certificate, tol=1e-6).passed
        definicion = verify_bsa_by_definition(problema, solucion.c, trials=300, norm="lp", slack_tol=1e-9)
        assert definicion.passed

    def test_normas_por_parametro(self, simetrica_l2):
        np.testing.assert_allclose(residual_lp_norms(simetrica_l2, [0.0]), [np.sqrt(2.0)] * 2)
        assert lp_deviation(simetrica_l2, [1.0]) == pytest.approx(np.sqrt(5.0))


class TestErrores:

    def test_requiere_medida(self, simetrica):
        with pytest.raises(ProblemError, match="measure"):
            solve_lp_bsa(simetrica)

    def test_p_distinto(self, simetrica_l2, solucion_simetrica_l2):
        certificado = solucion_simetrica_l2.certificate.model_copy(update={"p": 3.0})
        with pytest.raises(ProblemError, match="dimension mismatch"):
            verify_lp_certificate(simetrica_l2, solucion_simetrica_l2.c, certificado)

    def test_parametro_desconocido(self, simetrica_l2, solucion_simetrica_l2):
        certificado = solucion_simetrica_l2.certificate.model_copy(update={"params": ["otro"]})
        with pytest.raises(ProblemError):
            verify_lp_certificate(simetrica_l2, solucion_simetrica_l2.c, certificado)

    def test_p_invalido(self):
        with pytest.raises(ValueError):
            _medida([1.0, 1.0], 0.5)
