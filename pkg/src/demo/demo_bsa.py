# ./src/demo/demo_bsa.py

import os
import sys
import time

# Agregar el directorio raíz al path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))

from src.bsa.lp_bsa import solve_lp_bsa, verify_lp_certificate  # noqa: E402
from src.bsa.problem import hull_family, with_family  # noqa: E402
from src.bsa.storage import AlmacenResultados  # noqa: E402
from src.bsa.uniform_bsa import (  # noqa: E402
    alternation_report, solve_uniform_bsa, verify_bsa_by_definition, verify_uniform_certificate
)
from src.bsa.unicity import check_strong_unicity, strong_unicity_gamma  # noqa: E402
from src.datos_sinteticos.generador_problemas import GeneradorProblemas, norma_recomendada  # noqa: E402


class DemostracionBSA:
    """
    Demostración completa de la mejor aproximación simultánea.

    Recorre el corpus:
    1. Resuelve cada problema en su norma (uniforme o L^p)
    2. Verifica el certificado y la definición por muestreo
    3. Calcula γ en el problema de Chebyshev y valida la unicidad fuerte
    4. Compara la familia de vértices con su envoltura convexa
    5. Guarda soluciones, reportes y tablas de residuos
    """

    def __init__(self, directorio_resultados: str = "data/resultados", seed: int = 42):
        self.generador = GeneradorProblemas(seed=seed)
        self.almacen = AlmacenResultados(directorio_resultados)
        self.seed = seed
        self.soluciones = {}

        print("🎭 DEMOSTRACIÓN DE APROXIMACIÓN SIMULTÁNEA")
        print("=" * 60)

    def resolver_corpus(self):
        print("\n1️⃣ RESOLVIENDO EL CORPUS")
        print("-" * 40)
        for nombre, problema in self.generador.corpus().items():
            inicio = time.time()
            if norma_recomendada(problema) == "lp":
                solucion = solve_lp_bsa(problema)
                reporte = verify_lp_certificate(problema, solucion.coefficients, solucion.certificate)
            else:
                solucion = solve_uniform_bsa(problema)
                reporte = verify_uniform_certificate(problema, solucion.coefficients, solucion.certificate)

            estado = "✅" if reporte.passed else "❌"
            print(f"  {estado} {nombre}: valor {solucion.value:.6f}, k={solucion.k} "
                  f"({time.time() - inicio:.2f}s)")
            self.soluciones[nombre] = (problema, solucion)
            self.almacen.guardar_solucion(nombre, solucion)
            self.almacen.guardar_reporte(nombre, "verificacion", reporte)
            self.almacen.exportar_residuos(nombre, problema, solucion)

    def comprobar_definicion(self):
        print("\n2️⃣ COMPROBACIÓN POR DEFINICIÓN")
        print("-" * 40)
        for nombre, (problema, solucion) in self.soluciones.items():
            reporte = verify_bsa_by_definition(problema, solucion.coefficients, trials=200,
                                               seed=self.seed, norm=solucion.norm)
            estado = "✅" if reporte.passed else "⚠️"
            print(f"  {estado} {nombre}: holgura mínima {reporte.min_slack:.3e}")

    def unicidad_fuerte(self):
        print("\n3️⃣ UNICIDAD FUERTE")
        print("-" * 40)
        problema, solucion = self.soluciones["chebyshev_x2"]
        alternancia = alternation_report(problema, solucion.certificate)
        print(f"  🔍 Signos en el soporte: {alternancia.signs} (alterna: {alternancia.alternating})")

        datos = strong_unicity_gamma(problema, solucion.certificate)
        reporte = check_strong_unicity(problema, solucion.coefficients, datos, trials=1000, seed=self.seed)
        print(f"  📊 γ = {datos.gamma:.6f}, razón mínima observada {reporte.min_ratio:.6f}")
        self.almacen.guardar_reporte("chebyshev_x2", "gamma", reporte)

    def envoltura_convexa(self, resolucion: int = 4):
        print("\n4️⃣ ENVOLTURA CONVEXA")
        print("-" * 40)
        problema, solucion = self.soluciones["envoltura_tres"]
        envoltura = with_family(problema, hull_family(problema.family, resolucion))
        solucion_envoltura = solve_uniform_bsa(envoltura)
        print(f"  📊 Vértices: {solucion.value:.10f}")
        print(f"  📊 Envoltura ({envoltura.params.size} funciones): {solucion_envoltura.value:.10f}")

    def ejecutar(self):
        inicio = time.time()
        self.resolver_corpus()
        self.comprobar_definicion()
        self.unicidad_fuerte()
        self.envoltura_convexa()
        print("\n" + "=" * 60)
        print(f"✅ DEMOSTRACIÓN COMPLETADA en {time.time() - inicio:.2f}s")
        print(f"📁 Resultados en {self.almacen.directorio_base}")


if __name__ == "__main__":
    try:
        DemostracionBSA().ejecutar()
    except KeyboardInterrupt:
        print("\n⏹️ Demostración cancelada por el usuario")
        sys.exit(1)
