# ./tests/test_corpus.py

import pytest

from src.bsa.lp_bsa import solve_lp_bsa, verify_lp_certificate
from src.bsa.uniform_bsa import solve_uniform_bsa, verify_bsa_by_definition, verify_uniform_certificate
from src.bsa.unicity import check_strong_unicity, strong_unicity_gamma
from src.datos_sinteticos.generador_problemas import norma_recomendada


@pytest.fixture(scope="module")
def soluciones(corpus):
    resueltas = {}
    for nombre, problema in corpus.items():
        if norma_recomendada(problema) == "lp":
            resueltas[nombre] = solve_lp_bsa(problema)
        else:
            resueltas[nombre] = solve_uniform_bsa(problema)
    return resueltas


def test_corpus_completo(corpus):
    assert len(corpus) == 14


def test_certificados_verificados(corpus, soluciones):
    for nombre, problema in corpus.items():
        solucion = soluciones[nombre]
        assert solucion.k <= problema.n + 1, nombre
        if solucion.norm == "lp":
            reporte = verify_lp_certificate(problema, solucion.c, solucion.certificate, tol=1e-6)
        else:
            reporte = verify_uniform_certificate(problema, solucion.c, solucion.certificate, tol=1e-6)
        assert reporte.passed, f"{nombre}: {reporte.fallidas()}"


def test_ningun_competidor_mejora(corpus, soluciones):
    for nombre, problema in corpus.items():
        solucion = soluciones[nombre]
        reporte = verify_bsa_by_definition(problema, solucion.c, trials=1000, seed=42, norm=solucion.norm,
                                           slack_tol=1e-12)
        assert reporte.passed, f"{nombre}: holgura mínima {reporte.min_slack}"


def test_unicidad_fuerte(corpus, soluciones):
    revisados = 0
    for nombre, problema in corpus.items():
        solucion = soluciones[nombre]
        if solucion.norm != "uniform" or problema.d != 1 or solucion.certificate.degenerate:
            continue
        certificado = solucion.certificate
        puntos = [par.point for par in certificado.pairs]
        if certificado.k != problema.n + 1 or len(set(puntos)) != len(puntos):
            continue

        datos = strong_unicity_gamma(problema, certificado)
        assert datos.gamma > 0, nombre
        reporte = check_strong_unicity(problema, solucion.c, datos, trials=1000, seed=42)
        assert reporte.passed, f"{nombre}: razón mínima {reporte.min_ratio}"
        revisados += 1

    assert revisados >= 1
