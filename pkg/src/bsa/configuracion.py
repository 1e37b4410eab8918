import json
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, Field

RUTA_CONFIG_DEFECTO = Path(__file__).resolve().parents[2] / "config" / "bsa.json"


class ConfiguracionNumerica(BaseModel):
    """
    Tolerancias y límites numéricos compartidos por todos los módulos.

    Los valores por defecto reproducen los documentados en `config/bsa.json`.
    """
    pivot_tol: float = Field(default=1e-10, description="Tolerancia de pivote del símplex")
    feas_tol: float = Field(default=1e-9, description="Tolerancia de factibilidad primal")
    comp_tol: float = Field(default=1e-9, description="Tolerancia de holgura complementaria")
    max_iter_simplex: int = Field(default=50000, description="Límite de pivoteos por fase")
    rank_tol: float = Field(default=1e-10, description="Umbral relativo de valores singulares")
    gap_tol: float = Field(default=1e-9, description="Brecha absoluta de planos cortantes")
    max_iter_kelley: int = Field(default=500, description="Iteraciones de planos cortantes")
    max_iter_kelley_p_cercano_1: int = Field(default=2000, description="Iteraciones cuando p < 1.2")
    max_expansiones_caja: int = Field(default=5, description="Duplicaciones de la caja acotante")
    tol_condicion_i: float = Field(default=1e-7, description="Tolerancia de la condición (i')")
    tol_condicion_ii: float = Field(default=1e-6, description="Tolerancia de la condición (ii)")
    tol_saddle: float = Field(default=1e-7, description="Tolerancia de la condición de silla")
    tol_lu: float = Field(default=1e-12, description="Umbral relativo de singularidad LU")
    tol_haar: float = Field(default=1e-10, description="Umbral relativo de determinantes de Haar")
    seed: int = Field(default=42, ge=0, lt=2**64, description="Semilla maestra")


def cargar_configuracion(ruta: Optional[Union[str, Path]] = None) -> ConfiguracionNumerica:
    """
    Cargar la configuración numérica.

    Orden de búsqueda: argumento explícito, variable `BSA_CONFIG` (también desde
    un archivo `.env`) y finalmente `config/bsa.json`. Si no existe ningún
    archivo se usan los valores por defecto.

    Parameters
    ----------
    ruta : Optional[Union[str, Path]]
        Ruta explícita al archivo JSON de configuración

    Returns
    -------
    ConfiguracionNumerica
        Configuración validada
    """
    load_dotenv()
    candidata = ruta or os.environ.get("BSA_CONFIG") or RUTA_CONFIG_DEFECTO
    candidata = Path(candidata)

    if not candidata.exists():
        if ruta is not None:
            raise FileNotFoundError(f"No se encontró el archivo de configuración: {candidata}")
        return ConfiguracionNumerica()

    with open(candidata, "r") as f:
        datos = json.load(f)

    return ConfiguracionNumerica(**datos.get("tolerancias", {}), **datos.get("aleatoriedad", {}))


CONFIG_DEFECTO = ConfiguracionNumerica()
