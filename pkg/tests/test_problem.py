# ./tests/test_problem.py

import json
from pathlib import Path

import numpy as np
import pytest

from src.bsa.configuracion import ConfiguracionNumerica
from src.bsa.errores import ProblemError
from src.bsa.models import Basis, ParameterGrid, FunctionFamily
from src.bsa.problem import (
    approximant_table, dump_problem, evaluate_approximant, hull_family, least_squares_fit,
    load_problem, residual, residual_norms, uniform_deviation, with_family
)
from tests.utilidades import problema_escalar


def _archivo_minimo(**cambios):
    contenido = {
        "domain_points": [{"label": "p", "coords": [0.0]}, {"label": "q", "coords": [1.0]}],
        "interval": True,
        "params": ["f"],
        "codomain_dim": 1,
        "family": {"f": {"p": [1.0], "q": [3.0]}},
        "basis": [{"p": [1.0], "q": [1.0]}],
    }
    contenido.update(cambios)
    return contenido


def _escribir(tmp_path, contenido, nombre="problema.json"):
    ruta = tmp_path / nombre
    ruta.write_text(json.dumps(contenido))
    return ruta


class TestCargaProblema:

    def test_archivo_minimo_valido(self, tmp_path):
        problema = load_problem(_escribir(tmp_path, _archivo_minimo()))
        assert problema.params.size == 1
        assert problema.domain.size == 2
        assert problema.n == 1 and problema.d == 1
        assert problema.name == "problema"

    def test_etiquetas_duplicadas(self, tmp_path):
        contenido = _archivo_minimo(domain_points=[{"label": "p", "coords": [0.0]}, {"label": "p", "coords": [1.0]}])
        with pytest.raises(ProblemError, match="duplicate label"):
            load_problem(_escribir(tmp_path, contenido))

    def test_base_de_rango_deficiente(self, tmp_path):
        contenido = _archivo_minimo(
            domain_points=[{"label": s, "coords": [float(i)]} for i, s in enumerate("pqr")],
            family={"f": {"p": [1.0], "q": [3.0], "r": [0.0]}},
            basis=[{"p": [1.0], "q": [2.0], "r": [3.0]}, {"p": [2.0], "q": [4.0], "r": [6.0]}],
        )
        with pytest.raises(ProblemError, match="basis rank < n") as error:
            load_problem(_escribir(tmp_path, contenido))
        assert error.value.field == "basis"

    def test_tolerancia_de_rango_configurable(self, tmp_path):
        contenido = _archivo_minimo(
            domain_points=[{"label": s, "coords": [float(i)]} for i, s in enumerate("pqr")],
            family={"f": {"p": [1.0], "q": [3.0], "r": [0.0]}},
            basis=[{"p": [1.0], "q": [2.0], "r": [3.0]}, {"p": [2.0], "q": [4.0], "r": [6.0001]}],
        )
        ruta = _escribir(tmp_path, contenido)
        assert load_problem(ruta).n == 2
        with pytest.raises(ProblemError, match="basis rank < n"):
            load_problem(ruta, ConfiguracionNumerica(rank_tol=1e-3))

    def test_tabla_incompleta(self, tmp_path):
        contenido = _archivo_minimo(family={"f": {"p": [1.0]}})
        with pytest.raises(ProblemError, match="missing table entries"):
            load_problem(_escribir(tmp_path, contenido))

    def test_punto_desconocido(self, tmp_path):
        contenido = _archivo_minimo(family={"f": {"p": [1.0], "q": [3.0], "z": [0.0]}})
        with pytest.raises(ProblemError, match="unknown point label"):
            load_problem(_escribir(tmp_path, contenido))

    def test_familia_vacia(self, tmp_path):
        with pytest.raises(ProblemError, match="empty family"):
            load_problem(_escribir(tmp_path, _archivo_minimo(params=[], family={})))

    def test_peso_no_positivo(self, tmp_path):
        contenido = _archivo_minimo(measure={"weights": {"p": 1.0, "q": 0.0}, "p": 2})
        with pytest.raises(ProblemError, match="non-positive measure weight"):
            load_problem(_escribir(tmp_path, contenido))

    def test_norma_de_codominio_no_soportada(self, tmp_path):
        with pytest.raises(ProblemError, match="unsupported codomain norm"):
            load_problem(_escribir(tmp_path, _archivo_minimo(codomain_norm="manhattan")))

    def test_intervalo_no_creciente(self, tmp_path):
        contenido = _archivo_minimo(domain_points=[{"label": "p", "coords": [1.0]}, {"label": "q", "coords": [0.0]}])
        with pytest.raises(ProblemError, match="interval"):
            load_problem(_escribir(tmp_path, contenido))

    def test_error_de_sintaxis_con_linea(self, tmp_path):
        ruta = tmp_path / "roto.json"
        ruta.write_text('{\n  "params": [\n')
        with pytest.raises(ProblemError, match="parse error") as error:
            load_problem(ruta)
        assert error.value.line is not None

    def test_ida_y_vuelta(self, tmp_path, generador):
        original = generador.circulo_d2(num_puntos=11)
        recargado = load_problem(dump_problem(original, tmp_path / "circulo.json"))
        assert recargado.domain.labels == original.domain.labels
        assert recargado.d == 2
        np.testing.assert_array_equal(recargado.family.values, original.family.values)
        np.testing.assert_array_equal(recargado.basis.values, original.basis.values)

    def test_medida_se_conserva(self, tmp_path, simetrica_l2):
        recargado = load_problem(dump_problem(simetrica_l2, tmp_path / "l2.json"))
        assert recargado.measure.p == 2.0
        np.testing.assert_array_equal(recargado.measure.weights, np.ones(3))


class TestEvaluacion:

    @pytest.fixture
    def base_lineal(self):
        return Basis(point_labels=["a", "b", "c"], values=[[1.0, 1.0, 1.0], [-1.0, 0.0, 1.0]])

    def test_coeficientes_nulos(self, base_lineal):
        np.testing.assert_array_equal(evaluate_approximant(base_lineal, [0.0, 0.0], "b"), [0.0])

    def test_vector_unitario(self, base_lineal):
        assert evaluate_approximant(base_lineal, [1.0, 0.0], "a")[0] == 1.0

    def test_combinacion(self, base_lineal):
        valores = [evaluate_approximant(base_lineal, [1.0, 2.0], x)[0] for x in ("a", "b", "c")]
        assert valores == [-1.0, 1.0, 3.0]
        np.testing.assert_array_equal(approximant_table(base_lineal, [1.0, 2.0])[:, 0], [-1.0, 1.0, 3.0])

    def test_punto_desconocido(self, base_lineal):
        with pytest.raises(KeyError):
            evaluate_approximant(base_lineal, [1.0, 2.0], "z")

    def test_longitud_incorrecta(self, base_lineal):
        with pytest.raises(ValueError):
            evaluate_approximant(base_lineal, [1.0], "a")

    def test_residuo_escalar(self):
        x = np.array([-1.0, 0.0, 1.0])
        problema = problema_escalar(x, {"x2": x ** 2}, [np.ones(3), x])
        assert residual(problema, [0.5, 0.0], "x2", "x0002")[0] == pytest.approx(0.5)

    def test_residuo_interpolado_es_cero(self):
        x = np.array([-1.0, 0.0, 1.0])
        problema = problema_escalar(x, {"recta": 1 + 2 * x}, [np.ones(3), x])
        np.testing.assert_allclose(residual(problema, [1.0, 2.0], "recta", "x0001"), [0.0])

    def test_residuo_vectorial(self, generador):
        problema = generador.circulo_d2(num_puntos=5)
        np.testing.assert_allclose(residual(problema, [0.0, 0.0], 0, 0), [1.0, 0.0])

    def test_normas_y_desviacion(self, chebyshev):
        normas = residual_norms(chebyshev, [0.5, 0.0])
        assert normas.shape == (1, 1001)
        assert uniform_deviation(chebyshev, [0.5, 0.0]) == pytest.approx(0.5)

    def test_minimos_cuadrados_ajusta_la_media(self):
        x = np.linspace(-1, 1, 9)
        problema = problema_escalar(x, {"mas": x + 1, "menos": 1 - x}, [np.ones(9), x])
        np.testing.assert_allclose(least_squares_fit(problema), [1.0, 0.0], atol=1e-12)


class TestEnvolturaConvexa:

    @pytest.fixture
    def familia(self):
        def construir(num):
            etiquetas = [f"g{j}" for j in range(num)]
            valores = np.arange(num * 4, dtype=float).reshape(num, 4)
            return FunctionFamily(params=ParameterGrid(labels=etiquetas), point_labels=list("abcd"), values=valores)
        return construir

    def test_resolucion_uno_devuelve_vertices(self, familia):
        envoltura = hull_family(familia(2), 1)
        assert sorted(envoltura.params.labels) == ["g0", "g1"]

    def test_resolucion_dos_con_dos_funciones(self, familia):
        original = familia(2)
        envoltura = hull_family(original, 2)
        assert envoltura.params.size == 3
        punto_medio = [i for i, a in enumerate(envoltura.params.labels) if a.startswith("hull")]
        assert len(punto_medio) == 1
        np.testing.assert_allclose(envoltura.values[punto_medio[0]], original.values.mean(axis=0))

    def test_resolucion_dos_con_tres_funciones(self, familia):
        envoltura = hull_family(familia(3), 2)
        assert envoltura.params.size == 6
        assert {"g0", "g1", "g2"} <= set(envoltura.params.labels)

    def test_coordenadas_en_el_simplex(self, familia):
        envoltura = hull_family(familia(3), 4)
        np.testing.assert_allclose(envoltura.params.coords.sum(axis=1), 1.0)
        assert np.all(envoltura.params.coords >= 0)

    def test_resolucion_invalida(self, familia):
        with pytest.raises(ValueError):
            hull_family(familia(2), 0)

    def test_con_otra_familia(self, generador):
        problema = generador.envoltura_tres(num_puntos=11)
        envoltura = with_family(problema, hull_family(problema.family, 2))
        assert envoltura.params.size == 6
        assert envoltura.domain.labels == problema.domain.labels


class TestEjemplosDelRepositorio:

    RAIZ = Path(__file__).resolve().parents[1] / "data" / "ejemplos"

    def test_simetrica_pequena(self):
        problema = load_problem(self.RAIZ / "simetrica_pequena.json")
        assert problema.name == "simetrica_pequena"
        assert uniform_deviation(problema, [0.0]) == 1.0

    def test_base_deficiente(self):
        with pytest.raises(ProblemError, match="basis rank < n"):
            load_problem(self.RAIZ / "base_deficiente.json")
