# ./src/bsa/cli.py

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.bsa.configuracion import ConfiguracionNumerica, cargar_configuracion
from src.bsa.errores import CertificateError, ProblemError, SolverError
from src.bsa.lp_bsa import solve_lp_bsa, verify_lp_certificate
from src.bsa.models import ReporteVerificacion, RunConfig, SampledProblem, Solution
from src.bsa.problem import hull_family, load_problem, with_family
from src.bsa.storage import cargar_solucion, exportar_reporte_csv, guardar_reporte, guardar_solucion
from src.bsa.uniform_bsa import solve_uniform_bsa, verify_uniform_certificate
from src.bsa.unicity import check_strong_unicity, strong_unicity_gamma

EXIT_OK = 0
EXIT_ENTRADA = 2
EXIT_SOLVER = 3
EXIT_VERIFICACION = 4


def _error(mensaje: str):
    print(f"❌ {mensaje}", file=sys.stderr)


def _resolver(problema: SampledProblem, norma: str, config: ConfiguracionNumerica) -> Solution:
    if norma == "lp":
        return solve_lp_bsa(problema, config)
    return solve_uniform_bsa(problema, config=config)


def _verificar(problema: SampledProblem, solucion: Solution, tol: Optional[float],
               config: ConfiguracionNumerica) -> ReporteVerificacion:
    if solucion.norm == "lp":
        return verify_lp_certificate(problema, solucion.coefficients, solucion.certificate, tol, config)
    return verify_uniform_certificate(problema, solucion.coefficients, solucion.certificate, tol, config)


def _ruta_salida(run: RunConfig, sufijo: str) -> Path:
    if run.out_path:
        return Path(run.out_path)
    problema = Path(run.problem_path)
    return problema.with_name(f"{problema.stem}_{sufijo}.json")


def cmd_solve(run: RunConfig, config: ConfiguracionNumerica) -> int:
    problema = load_problem(run.problem_path, config)
    solucion = _resolver(problema, run.norm, config)
    ruta = guardar_solucion(solucion, _ruta_salida(run, "solucion"))
    print(f"value {solucion.value:.6f}, k={solucion.k}")
    print(f"✅ Solución guardada en {ruta}")
    return EXIT_OK


def cmd_verify(run: RunConfig, config: ConfiguracionNumerica) -> int:
    problema = load_problem(run.problem_path, config)
    solucion = cargar_solucion(run.solution_path)
    reporte = _verificar(problema, solucion, run.tol, config)

    print(f"🔍 Verificación del certificado ({solucion.norm}, k={solucion.k})")
    print(reporte.tabla().to_string(index=False))
    if run.out_path:
        guardar_reporte(reporte, run.out_path)

    if not reporte.passed:
        print(f"❌ Condiciones fallidas: {', '.join(reporte.fallidas())}")
        return EXIT_VERIFICACION
    print("✅ Todas las condiciones se cumplen")
    return EXIT_OK


def cmd_gamma(run: RunConfig, config: ConfiguracionNumerica) -> int:
    problema = load_problem(run.problem_path, config)
    solucion = cargar_solucion(run.solution_path)
    if solucion.norm != "uniform":
        raise CertificateError("γ solo está definida para soluciones de norma uniforme")

    datos = strong_unicity_gamma(problema, solucion.certificate, config=config)
    reporte = check_strong_unicity(problema, solucion.coefficients, datos, trials=run.trials, seed=config.seed)
    print(f"gamma {datos.gamma:.6f}")
    print(f"📊 Razón mínima en {reporte.trials} competidores: {reporte.min_ratio:.6f} "
          f"(violaciones: {reporte.violations})")
    ruta = guardar_reporte(reporte, _ruta_salida(run, "gamma"))
    print(f"✅ Reporte guardado en {ruta}")
    return EXIT_OK if reporte.passed else EXIT_VERIFICACION


def cmd_hull(run: RunConfig, config: ConfiguracionNumerica) -> int:
    problema = load_problem(run.problem_path, config)
    vertices = _resolver(problema, run.norm, config)
    envoltura = with_family(problema, hull_family(problema.family, run.hull_resolution))
    solucion_envoltura = _resolver(envoltura, run.norm, config)

    print(f"value vertices {vertices.value:.6f}, k={vertices.k}")
    print(f"value hull {solucion_envoltura.value:.6f}, k={solucion_envoltura.k} "
          f"({envoltura.params.size} funciones, resolución {run.hull_resolution})")
    print(f"📊 Diferencia: {abs(vertices.value - solucion_envoltura.value):.3e}")
    if run.out_path:
        guardar_solucion(solucion_envoltura, run.out_path)
    return EXIT_OK


def cmd_report(run: RunConfig, config: ConfiguracionNumerica) -> int:
    problema = load_problem(run.problem_path, config)
    solucion = cargar_solucion(run.solution_path)
    ruta = exportar_reporte_csv(problema, solucion, run.csv_path)
    print(f"✅ Reporte CSV guardado en {ruta}")
    return EXIT_OK


COMANDOS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "gamma": cmd_gamma,
    "hull": cmd_hull,
    "report": cmd_report,
}


def construir_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.bsa.cli",
        description="Mejor aproximación simultánea: resolver, certificar y verificar",
    )
    parser.add_argument("command", choices=sorted(COMANDOS), help="Operación a ejecutar")
    parser.add_argument("problem", help="Archivo JSON del problema")
    parser.add_argument("solution", nargs="?", help="Archivo JSON de la solución (verify, gamma, report)")
    parser.add_argument("--norm", choices=["uniform", "lp"], default="uniform", help="Norma de aproximación")
    parser.add_argument("--tol", type=float, help="Tolerancia de verificación")
    parser.add_argument("--seed", type=int, default=None,
                        help="Semilla de los muestreos aleatorios (por defecto la de la configuración)")
    parser.add_argument("--out", help="Archivo de salida")
    parser.add_argument("--csv", help="Archivo CSV de residuos (report)")
    parser.add_argument("--trials", type=int, default=1000, help="Competidores aleatorios (gamma)")
    parser.add_argument("--hull-resolution", type=int, default=4, help="Resolución de la retícula del símplex")
    parser.add_argument("--config", help="Archivo de configuración numérica")
    parser.add_argument("--verbose", action="store_true", help="Mostrar el progreso de los solvers")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Punto de entrada de la línea de comandos.

    Códigos de salida: 0 éxito, 2 entrada inválida o E/S, 3 falla del solver,
    4 verificación fallida.
    """
    args = construir_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(levelname)s %(name)s: %(message)s")

    try:
        run = RunConfig(
            command=args.command, problem_path=args.problem, solution_path=args.solution,
            norm=args.norm, tol=args.tol, seed=args.seed, trials=args.trials,
            hull_resolution=args.hull_resolution, out_path=args.out, csv_path=args.csv,
            config_path=args.config,
        )
        config = cargar_configuracion(run.config_path)
        if run.seed is not None:
            config = config.model_copy(update={"seed": run.seed})
        return COMANDOS[run.command](run, config)
    except ValidationError as e:
        _error(f"Argumentos inválidos: {e.errors()[0]['msg']}")
        return EXIT_ENTRADA
    except (ProblemError, OSError, KeyError) as e:
        _error(f"Error de entrada: {e}")
        return EXIT_ENTRADA
    except (SolverError, CertificateError) as e:
        _error(f"Error del solver: {e}")
        return EXIT_SOLVER
    except ValueError as e:
        _error(f"Error de entrada: {e}")
        return EXIT_ENTRADA


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n⏹️ Proceso cancelado por el usuario")
        sys.exit(1)
