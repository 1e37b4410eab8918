from typing import Any, Dict, Optional


class BSAError(Exception):
    """Error base de la librería de aproximación simultánea."""


class ProblemError(BSAError, ValueError):
    """
    Error de ingestión o validación de un problema discretizado.

    Parameters
    ----------
    mensaje : str
        Descripción del error
    field : Optional[str]
        Campo del archivo de problema que lo provocó
    line : Optional[int]
        Línea del archivo JSON (solo errores de sintaxis)
    """

    def __init__(self, mensaje: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        ubicacion = []
        if line is not None:
            ubicacion.append(f"line {line}")
        if field:
            ubicacion.append(f"field '{field}'")
        if ubicacion:
            mensaje = f"{mensaje} ({', '.join(ubicacion)})"
        super().__init__(mensaje)


class SolverError(BSAError):
    """Fallo de un solver (programación lineal o minimax)."""

    def __init__(self, mensaje: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(mensaje)


class InfeasibleError(SolverError):
    """El programa lineal no tiene puntos factibles."""


class UnboundedError(SolverError):
    """El objetivo no está acotado inferiormente."""


class IterationLimitError(SolverError):
    """Se alcanzó el límite de iteraciones sin converger."""


class SingularBasisError(SolverError):
    """Base numéricamente singular durante un pivoteo o extracción de duales."""


class CertificateError(BSAError):
    """Certificado inconsistente o fuera de las hipótesis de una operación."""


def campo_de_error(loc) -> Optional[str]:
    """
    Ruta legible de un error de pydantic.

    Descarta las etiquetas internas de validadores y uniones
    (`function-after[...]` y similares).
    """
    partes = [
        str(parte) for parte in loc
        if isinstance(parte, int) or (isinstance(parte, str) and parte.isidentifier())
    ]
    return ".".join(partes) or None
