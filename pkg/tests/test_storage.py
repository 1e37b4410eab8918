# ./tests/test_storage.py

import json

import pandas as pd
import pytest

from src.bsa.errores import ProblemError
from src.bsa.lp_bsa import solve_lp_bsa
from src.bsa.models import LpCertificate, ReporteVerificacion, UniformCertificate
from src.bsa.storage import (
    AlmacenResultados, cargar_solucion, exportar_reporte_csv, guardar_reporte, guardar_solucion, tabla_residuos
)
from src.bsa.uniform_bsa import solve_uniform_bsa, verify_uniform_certificate


@pytest.fixture(scope="module")
def solucion_simetrica(simetrica):
    return solve_uniform_bsa(simetrica)


class TestSoluciones:

    def test_ida_y_vuelta(self, tmp_path, solucion_simetrica):
        ruta = guardar_solucion(solucion_simetrica, tmp_path / "solucion.json")
        recargada = cargar_solucion(ruta)
        assert isinstance(recargada.certificate, UniformCertificate)
        assert recargada.coefficients == solucion_simetrica.coefficients
        assert recargada.certificate.lambdas == solucion_simetrica.certificate.lambdas
        assert recargada.value == solucion_simetrica.value

    def test_certificado_lp(self, tmp_path, simetrica_l2):
        solucion = solve_lp_bsa(simetrica_l2)
        recargada = cargar_solucion(guardar_solucion(solucion, tmp_path / "lp.json"))
        assert isinstance(recargada.certificate, LpCertificate)
        assert recargada.certificate.p == 2.0

    def test_sin_diagnosticos_de_reloj(self, tmp_path, solucion_simetrica):
        datos = json.loads(guardar_solucion(solucion_simetrica, tmp_path / "s.json").read_text())
        assert "elapsed" not in datos["diagnostics"]
        assert "total_elapsed" not in datos["diagnostics"]
        assert datos["diagnostics"]["solver"] == "lp"

    def test_bytes_reproducibles(self, tmp_path, simetrica):
        primera = guardar_solucion(solve_uniform_bsa(simetrica), tmp_path / "a.json")
        segunda = guardar_solucion(solve_uniform_bsa(simetrica), tmp_path / "b.json")
        assert primera.read_bytes() == segunda.read_bytes()

    def test_json_invalido(self, tmp_path):
        ruta = tmp_path / "roto.json"
        ruta.write_text("{ no es json")
        with pytest.raises(ProblemError, match="parse error"):
            cargar_solucion(ruta)

    def test_esquema_invalido(self, tmp_path):
        ruta = tmp_path / "incompleta.json"
        ruta.write_text(json.dumps({"norm": "uniform", "coefficients": [0.0]}))
        with pytest.raises(ProblemError) as error:
            cargar_solucion(ruta)
        assert error.value.field is not None

    def test_campo_sin_envoltorios_de_validadores(self, tmp_path, solucion_simetrica):
        ruta = guardar_solucion(solucion_simetrica, tmp_path / "solucion.json")
        datos = json.loads(ruta.read_text())
        datos["certificate"]["lambdas"] = [0.9, 0.3]
        ruta.write_text(json.dumps(datos))
        with pytest.raises(ProblemError) as error:
            cargar_solucion(ruta)
        campo = error.value.field
        assert campo.startswith("certificate")
        assert "[" not in campo
        assert "function" not in campo

    def test_flotantes_con_17_cifras(self, tmp_path):
        reporte = ReporteVerificacion(subject="uniform")
        reporte.agregar("dualidad", 0.1, 1.0)
        texto = guardar_reporte(reporte, tmp_path / "reporte.json").read_text()
        assert '"residual": 0.10000000000000001' in texto
        assert '"tolerance": 1.0' in texto
        assert json.loads(texto)["checks"][0]["residual"] == 0.1


class TestReportes:

    def test_reporte_de_verificacion(self, tmp_path, simetrica, solucion_simetrica):
        reporte = verify_uniform_certificate(simetrica, solucion_simetrica.c, solucion_simetrica.certificate)
        datos = json.loads(guardar_reporte(reporte, tmp_path / "reporte.json").read_text())
        assert datos["subject"] == "uniform"
        assert all(condicion["passed"] for condicion in datos["checks"])

    def test_tabla_uniforme(self, simetrica, solucion_simetrica):
        tabla = tabla_residuos(simetrica, solucion_simetrica)
        assert list(tabla.columns) == ["param", "point", "residual_norm", "is_support"]
        assert len(tabla) == simetrica.params.size * simetrica.domain.size
        assert tabla["is_support"].sum() == solucion_simetrica.k
        assert tabla["residual_norm"].max() == pytest.approx(solucion_simetrica.value)

    def test_tabla_lp(self, simetrica_l2):
        solucion = solve_lp_bsa(simetrica_l2)
        tabla = tabla_residuos(simetrica_l2, solucion)
        assert list(tabla["param"]) == ["mas_x", "menos_x"]
        assert set(tabla["point"]) == {""}

    def test_csv(self, tmp_path, simetrica, solucion_simetrica):
        ruta = exportar_reporte_csv(simetrica, solucion_simetrica, tmp_path / "sub" / "residuos.csv")
        tabla = pd.read_csv(ruta)
        assert list(tabla.columns) == ["param", "point", "residual_norm", "is_support"]
        assert len(tabla) == 402


class TestAlmacen:

    def test_estructura_y_listado(self, tmp_path, simetrica, solucion_simetrica):
        almacen = AlmacenResultados(str(tmp_path / "resultados"))
        for sub in ("soluciones", "reportes", "exportaciones"):
            assert (tmp_path / "resultados" / sub).is_dir()

        almacen.guardar_solucion("simetrica", solucion_simetrica)
        almacen.exportar_residuos("simetrica", simetrica, solucion_simetrica)
        assert almacen.listar_soluciones() == ["simetrica"]
        assert almacen.cargar_solucion("simetrica").value == solucion_simetrica.value
        assert (tmp_path / "resultados" / "exportaciones" / "simetrica.csv").exists()
