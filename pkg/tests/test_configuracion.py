# ./tests/test_configuracion.py

import json

import pytest

from src.bsa.configuracion import CONFIG_DEFECTO, ConfiguracionNumerica, cargar_configuracion


def test_valores_por_defecto():
    assert CONFIG_DEFECTO.gap_tol == 1e-9
    assert CONFIG_DEFECTO.max_iter_kelley == 500
    assert CONFIG_DEFECTO.seed == 42


def test_archivo_del_repositorio_coincide_con_los_defectos(monkeypatch):
    monkeypatch.delenv("BSA_CONFIG", raising=False)
    assert cargar_configuracion() == ConfiguracionNumerica()


def test_variable_de_entorno(tmp_path, monkeypatch):
    ruta = tmp_path / "otra.json"
    ruta.write_text(json.dumps({"tolerancias": {"gap_tol": 1e-6}, "aleatoriedad": {"seed": 7}}))
    monkeypatch.setenv("BSA_CONFIG", str(ruta))
    config = cargar_configuracion()
    assert config.gap_tol == 1e-6
    assert config.seed == 7
    assert config.pivot_tol == 1e-10


def test_ruta_explicita_inexistente(tmp_path):
    with pytest.raises(FileNotFoundError):
        cargar_configuracion(tmp_path / "no_existe.json")


def test_semilla_negativa():
    with pytest.raises(ValueError):
        ConfiguracionNumerica(seed=-1)
