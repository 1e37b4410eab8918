# ./scripts/generar_corpus.py

import argparse
import os
import sys
import time

# Agregar el directorio raíz al path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.datos_sinteticos.generador_problemas import GeneradorProblemas, norma_recomendada  # noqa: E402


def main() -> bool:
    """
    Escribir el corpus de problemas como archivos JSON.
    """
    parser = argparse.ArgumentParser(description="Generar el corpus de problemas de aproximación simultánea")
    parser.add_argument("--directorio", type=str, default="data/corpus", help="Directorio de salida")
    parser.add_argument("--seed", type=int, default=42, help="Semilla de las familias aleatorias")
    args = parser.parse_args()

    print("🚀 Generando corpus de problemas")
    print("=" * 60)
    inicio = time.time()

    generador = GeneradorProblemas(seed=args.seed)
    corpus = generador.corpus()
    rutas = generador.guardar_corpus(args.directorio)

    print(f"\n📊 RESUMEN ({len(rutas)} problemas):")
    for nombre, problema in corpus.items():
        print(f"  • {nombre}: |A|={problema.params.size} |X|={problema.domain.size} "
              f"n={problema.n} d={problema.d} norma={norma_recomendada(problema)}")

    print(f"\n📁 Archivos en {args.directorio}")
    print(f"⏱️ Tiempo: {time.time() - inicio:.2f} segundos")
    return True


if __name__ == "__main__":
    try:
        exito = main()
        sys.exit(0 if exito else 1)
    except KeyboardInterrupt:
        print("\n⏹️ Proceso cancelado por el usuario")
        sys.exit(1)
    except Exception as e:
        print(f"\n❌ Error inesperado: {e}")
        sys.exit(1)
