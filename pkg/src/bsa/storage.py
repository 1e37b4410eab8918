# ./src/bsa/storage.py

import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from src.bsa.errores import ProblemError, campo_de_error
from src.bsa.models import SampledProblem, Solution, UniformCertificate
from src.bsa.problem import residual_norms

logger = logging.getLogger(__name__)

Ruta = Union[str, Path]

# Claves de diagnóstico que dependen del reloj y romperían la reproducibilidad byte a byte
CLAVES_NO_DETERMINISTAS = ("elapsed", "total_elapsed")

CIFRAS_SIGNIFICATIVAS = 17


def _marcar_flotantes(valor: Any, flotantes: List[float]) -> Any:
    if isinstance(valor, float):
        if not math.isfinite(valor):
            raise ValueError(f"valor no finito en la salida JSON: {valor}")
        flotantes.append(valor)
        return f"\0F{len(flotantes) - 1}"
    if isinstance(valor, dict):
        return {clave: _marcar_flotantes(v, flotantes) for clave, v in valor.items()}
    if isinstance(valor, (list, tuple)):
        return [_marcar_flotantes(v, flotantes) for v in valor]
    return valor


def _formatear_flotante(valor: float) -> str:
    texto = format(valor, f".{CIFRAS_SIGNIFICATIVAS}g")
    if not any(caracter in texto for caracter in ".e"):
        texto += ".0"
    return texto


def _escribir_json(datos: Dict[str, Any], ruta: Ruta) -> Path:
    """Escribir JSON con todos los flotantes a 17 cifras significativas."""
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    flotantes: List[float] = []
    texto = json.dumps(_marcar_flotantes(datos, flotantes), indent=2, ensure_ascii=False)
    texto = re.sub(r'"\\u0000F(\d+)"', lambda m: _formatear_flotante(flotantes[int(m.group(1))]), texto)
    with open(ruta, "w") as f:
        f.write(texto)
        f.write("\n")
    return ruta


def guardar_solucion(solution: Solution, ruta: Ruta) -> Path:
    """
    Guardar una solución y su certificado como JSON.

    Los flotantes se escriben con 17 cifras significativas, de modo que
    entradas idénticas producen archivos idénticos y la lectura es exacta.
    """
    datos = solution.model_dump(mode="json")
    datos["diagnostics"] = {
        clave: valor for clave, valor in datos["diagnostics"].items() if clave not in CLAVES_NO_DETERMINISTAS
    }
    return _escribir_json(datos, ruta)


def cargar_solucion(ruta: Ruta) -> Solution:
    """Leer una solución; errores de sintaxis o de esquema → ProblemError."""
    ruta = Path(ruta)
    try:
        with open(ruta, "r") as f:
            datos = json.load(f)
    except json.JSONDecodeError as e:
        raise ProblemError(f"parse error en la solución: {e.msg} (column {e.colno})", line=e.lineno) from e

    try:
        return Solution.model_validate(datos)
    except ValidationError as e:
        primero = e.errors()[0]
        campo = campo_de_error(primero["loc"])
        raise ProblemError(f"solución inválida: {primero['msg']}", field=campo) from e


def guardar_reporte(reporte: BaseModel, ruta: Ruta) -> Path:
    """Guardar cualquier reporte como JSON."""
    return _escribir_json(reporte.model_dump(mode="json"), ruta)


def tabla_residuos(problem: SampledProblem, solution: Solution) -> pd.DataFrame:
    """
    Tabla de residuos para graficar externamente.

    Norma uniforme: una fila por par (param, point). Norma L^p: una fila por
    parámetro con la norma p del residuo y `point` vacío.
    """
    if solution.norm == "uniform":
        normas = residual_norms(problem, solution.c)
        certificado: UniformCertificate = solution.certificate
        soporte = {(par.param, par.point) for par in certificado.pairs}
        parametros = np.repeat(problem.params.labels, problem.domain.size)
        puntos = np.tile(problem.domain.labels, problem.params.size)
        return pd.DataFrame({
            "param": parametros,
            "point": puntos,
            "residual_norm": normas.reshape(-1),
            "is_support": [int((a, x) in soporte) for a, x in zip(parametros, puntos)],
        })

    from src.bsa.lp_bsa import residual_lp_norms
    normas = residual_lp_norms(problem, solution.c)
    soporte = set(solution.certificate.params)
    return pd.DataFrame({
        "param": problem.params.labels,
        "point": [""] * problem.params.size,
        "residual_norm": normas,
        "is_support": [int(a in soporte) for a in problem.params.labels],
    })


def exportar_reporte_csv(problem: SampledProblem, solution: Solution, ruta: Ruta) -> Path:
    """Escribir la tabla de residuos (param, point, residual_norm, is_support)."""
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    tabla_residuos(problem, solution).to_csv(ruta, index=False)
    return ruta


class AlmacenResultados:
    """
    Almacén de resultados en disco.

    Organiza soluciones, reportes y exportaciones CSV bajo un directorio base
    con un archivo por problema.
    """

    def __init__(self, directorio_base: str = "data/resultados"):
        """
        Inicializar el almacén de resultados.

        Parameters
        ----------
        directorio_base : str
            Directorio base para almacenar resultados
        """
        self.directorio_base = Path(directorio_base)
        self.directorio_base.mkdir(parents=True, exist_ok=True)

        (self.directorio_base / "soluciones").mkdir(exist_ok=True)
        (self.directorio_base / "reportes").mkdir(exist_ok=True)
        (self.directorio_base / "exportaciones").mkdir(exist_ok=True)

    def ruta_solucion(self, nombre: str) -> Path:
        return self.directorio_base / "soluciones" / f"{nombre}.json"

    def guardar_solucion(self, nombre: str, solution: Solution) -> Path:
        ruta = guardar_solucion(solution, self.ruta_solucion(nombre))
        logger.debug("Solución '%s' guardada en %s", nombre, ruta)
        return ruta

    def cargar_solucion(self, nombre: str) -> Solution:
        return cargar_solucion(self.ruta_solucion(nombre))

    def guardar_reporte(self, nombre: str, tipo: str, reporte: BaseModel) -> Path:
        return guardar_reporte(reporte, self.directorio_base / "reportes" / f"{nombre}_{tipo}.json")

    def exportar_residuos(self, nombre: str, problem: SampledProblem, solution: Solution) -> Path:
        return exportar_reporte_csv(problem, solution, self.directorio_base / "exportaciones" / f"{nombre}.csv")

    def listar_soluciones(self) -> List[str]:
        return sorted(ruta.stem for ruta in (self.directorio_base / "soluciones").glob("*.json"))
