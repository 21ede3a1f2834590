"""
Gera uma frota sintética de perfis para exercitar o analisador.

Cada instância executa uma mistura de cenários embutidos várias vezes (o número
de repetições varia por instância, com semente fixa) e grava um único perfil
`<instância>.gprof.txt` com todas as goroutines remanescentes renumeradas.

Uso:
    # Como módulo
    from scripts.generate_fleet import generate_fleet
    paths = generate_fleet("fleet/", instances=8)

    # Como script
    python scripts/generate_fleet.py fleet/ --instances 8 --seed 7
"""
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

import argparse
import random
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

from config.settings import PROFILE_SUFFIX
from app.profile import GoroutineProfile, write_profile_file
from app.runtime import SchedulerConfig, run
from app.scenarios import build_scenario
from app.snapshot import snapshot


# cenário → (faixa de repetições por instância, parâmetros)
# As faixas garantem, em toda instância, Select > ChanRecv > ChanSend
DEFAULT_MIX: Dict[str, Tuple[Tuple[int, int], dict]] = {
    'method-contract': ((30, 45), {}),          # 1 Select por execução
    'zero-case-select': ((10, 20), {}),         # 1 Select
    'unclosed-range': ((6, 8), {'workers': 3}), # 3 ChanRecv
    'timer-loop': ((1, 4), {}),                 # 1 ChanRecv
    'listing1': ((5, 10), {}),                  # 1 ChanSend
    'ncast': ((1, 3), {'n': 3}),                # 2 ChanSend
    'timeout-leak': ((0, 2), {}),               # 1 ChanSend
}


def instance_profile(instance_id: str, rng: random.Random,
                     mix: Dict[str, Tuple[Tuple[int, int], dict]],
                     captured_at: str = "") -> GoroutineProfile:
    """Executa a mistura de cenários e junta as goroutines num perfil só."""
    records = []
    for name in sorted(mix):
        (low, high), params = mix[name]
        program, expectation = build_scenario(name, params=params)
        for _ in range(rng.randint(low, high)):
            result = run(program, SchedulerConfig(seed=rng.randrange(2 ** 31)), expectation.conditions)
            records.extend(snapshot(result).goroutines)
    renumbered = [replace(record, id=i) for i, record in enumerate(records, 1)]
    return GoroutineProfile(instance_id, captured_at, renumbered)


def generate_fleet(out_dir, instances: int = 8, seed: int = 7,
                   mix: Optional[Dict[str, Tuple[Tuple[int, int], dict]]] = None,
                   captured_at: str = "2024-01-01T00:00:00Z") -> List[Path]:
    """
    Grava um perfil por instância em `out_dir`.

    Returns:
        Caminhos gravados, em ordem de instância
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    paths = []
    for i in range(1, instances + 1):
        instance_id = f"instance-{i:03d}"
        profile = instance_profile(instance_id, rng, mix or DEFAULT_MIX, captured_at)
        paths.append(write_profile_file(profile, out_dir / f"{instance_id}{PROFILE_SUFFIX}"))
        print(f"  {instance_id}: {len(profile)} goroutine(s)")
    return paths


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Gera perfis sintéticos de uma frota")
    parser.add_argument("out_dir")
    parser.add_argument("--instances", type=int, default=8)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    print(f"Gerando {args.instances} perfis em {args.out_dir}...")
    written = generate_fleet(args.out_dir, args.instances, args.seed)
    print(f"OK: {len(written)} arquivo(s)")
