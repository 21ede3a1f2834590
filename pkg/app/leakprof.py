"""
Análise de frota: agrega perfis de várias instâncias e aponta locais suspeitos.

Pipeline:
1. classifica cada goroutine e conta por BlockSite em cada perfil
2. filtro de limiar: algum perfil sozinho com >= threshold goroutines no local
3. filtro transitório: descarta select cujos braços são todos esperas transitórias
4. supressão por nome de função (totais vão para o resumo `suppressed`)
5. ordena por RMS das contagens por instância (zeros incluídos) e corta em top_n
"""
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import THRESHOLD, TOP_N, TRANSIENT_SYMBOLS, PARSE_MAX_WORKERS, REPORT_SCHEMA_VERSION
from app.models import BlockKind, BlockSite, PARKED_KINDS
from app.profile import GoroutineProfile, GoroutineRecord
from app.classifier import CATEGORIES, OTHER_CATEGORY, ClassificationError, category, classify, select_arm_symbols
from app.logger import log_finding, log_warning, log_info


class AnalyzerError(ValueError):
    """Entrada inválida para a análise de frota"""
    pass


@dataclass(frozen=True)
class AnalyzerConfig:
    threshold: int = THRESHOLD
    top_n: int = TOP_N
    transient_symbols: FrozenSet[str] = TRANSIENT_SYMBOLS
    suppression: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if self.threshold < 1:
            raise AnalyzerError("threshold deve ser >= 1")
        if self.top_n < 1:
            raise AnalyzerError("top_n deve ser >= 1")
        object.__setattr__(self, 'transient_symbols', frozenset(self.transient_symbols))
        object.__setattr__(self, 'suppression', frozenset(self.suppression))

    def as_dict(self) -> dict:
        return {
            'threshold': self.threshold,
            'top_n': self.top_n,
            'transient_symbols': sorted(self.transient_symbols),
            'suppression': sorted(self.suppression),
        }


@dataclass
class SiteStats:
    site: BlockSite
    per_instance_counts: List[Tuple[str, int]]     # só instâncias com contagem > 0, na ordem dos perfis
    total: int
    rms: float
    representative: Tuple[str, GoroutineRecord]

    @property
    def max_count(self) -> int:
        return max((c for _, c in self.per_instance_counts), default=0)


@dataclass
class LeakReport:
    generated_at: str
    config: dict
    findings: List[SiteStats]
    histogram: Dict[str, Tuple[int, float]]
    categories: Dict[str, Tuple[int, float]]
    suppressed: Dict[str, int]
    profiles: int = 0
    unclassified: int = 0
    schema_version: int = REPORT_SCHEMA_VERSION


@dataclass
class _ProfileTally:
    sites: Dict[BlockSite, int] = field(default_factory=dict)
    first_record: Dict[BlockSite, GoroutineRecord] = field(default_factory=dict)
    kinds: Counter = field(default_factory=Counter)
    categories: Counter = field(default_factory=Counter)
    unclassified: int = 0


def _tally_profile(profile: GoroutineProfile) -> _ProfileTally:
    tally = _ProfileTally()
    counts: Counter = Counter()
    for record in sorted(profile.goroutines, key=lambda g: g.id):
        try:
            site = classify(record)
        except ClassificationError as e:
            tally.unclassified += 1
            log_warning("analyzer", f"UNCLASSIFIED | instance={profile.instance_id} | {e}")
            continue
        counts[site] += 1
        tally.first_record.setdefault(site, record)
        tally.kinds[site.kind.value] += 1
        tally.categories[category(record, site)] += 1
    tally.sites = dict(counts)
    return tally


def _tally_all(profiles: List[GoroutineProfile], max_workers: int = PARSE_MAX_WORKERS) -> List[_ProfileTally]:
    if len(profiles) < 2:
        return [_tally_profile(p) for p in profiles]
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        return list(executor.map(_tally_profile, profiles))


def rms(counts: Iterable[int], profiles: int) -> float:
    """Raiz da média dos quadrados sobre `profiles` perfis (ausentes contam como zero)."""
    if profiles < 1:
        raise AnalyzerError("RMS exige ao menos um perfil")
    return math.sqrt(sum(c * c for c in counts) / profiles)


def transient_filter(site: BlockSite, record: GoroutineRecord, config: AnalyzerConfig) -> bool:
    """
    Critério 2: True mantém o local, False descarta.

    Só selects são descartados, e só quando todos os braços registrados abaixo
    do park são símbolos de espera transitória.
    """
    if site.kind != BlockKind.SELECT:
        return True
    arms = select_arm_symbols(record)
    if not arms:
        return True
    return not all(symbol in config.transient_symbols for symbol in arms)


def _percentages(counter: Counter, keys: Iterable[str]) -> Dict[str, Tuple[int, float]]:
    total = sum(counter.values())
    return {key: (counter.get(key, 0), (100.0 * counter.get(key, 0) / total) if total else 0.0)
            for key in keys}


def _histograms(tallies: List[_ProfileTally]):
    kinds: Counter = Counter()
    categories: Counter = Counter()
    for tally in tallies:
        kinds.update(tally.kinds)
        categories.update(tally.categories)
    kind_keys = [kind.value for kind in BlockKind]
    category_keys = list(CATEGORIES) + [OTHER_CATEGORY]
    return _percentages(kinds, kind_keys), _percentages(categories, category_keys)


def kind_histogram(profiles: List[GoroutineProfile]) -> Dict[str, Tuple[int, float]]:
    """Tipo de bloqueio → (contagem, percentual) sobre todos os registros."""
    return _histograms(_tally_all(list(profiles)))[0]


def category_histogram(profiles: List[GoroutineProfile]) -> Dict[str, Tuple[int, float]]:
    """As linhas da tabela de tipos de bloqueio (canal nil, select sem casos, ...) + Other."""
    return _histograms(_tally_all(list(profiles)))[1]


def analyze_fleet(profiles: List[GoroutineProfile], config: Optional[AnalyzerConfig] = None) -> LeakReport:
    """
    Executa o pipeline completo sobre a frota.

    Args:
        profiles: Perfis analisados (P = len(profiles) no denominador do RMS)
        config: Limiar, top_n, símbolos transitórios e supressão

    Returns:
        LeakReport com achados em ordem determinística

    Raises:
        AnalyzerError: nenhum perfil
    """
    profiles = list(profiles)
    if not profiles:
        raise AnalyzerError("nenhum perfil para analisar")
    config = config or AnalyzerConfig()

    tallies = _tally_all(profiles)
    P = len(profiles)

    sites = set()
    for tally in tallies:
        sites.update(site for site in tally.sites if site.kind in PARKED_KINDS)

    suppressed: Counter = Counter()
    findings: List[SiteStats] = []

    for site in sorted(sites, key=BlockSite.sort_key):
        counts = [(profile.instance_id, tally.sites.get(site, 0)) for profile, tally in zip(profiles, tallies)]
        total = sum(c for _, c in counts)

        if site.function in config.suppression:
            suppressed[site.function] += total
            continue

        if max(c for _, c in counts) < config.threshold:
            continue

        # representante: instância com a maior contagem; empate → menor instance_id
        best = min((i for i, (_, c) in enumerate(counts) if c > 0),
                   key=lambda i: (-counts[i][1], counts[i][0], i))
        record = tallies[best].first_record[site]

        if not transient_filter(site, record, config):
            log_info("analyzer", f"TRANSIENT_DROPPED | site={site}")
            continue

        findings.append(SiteStats(
            site=site,
            per_instance_counts=[(inst, c) for inst, c in counts if c > 0],
            total=total,
            rms=rms((c for _, c in counts), P),
            representative=(counts[best][0], record),
        ))

    findings.sort(key=lambda s: (-s.rms, -s.total, s.site.sort_key()))
    findings = findings[:config.top_n]
    for stats in findings:
        log_finding(stats.site.kind.value, str(stats.site.location), stats.total, stats.rms)

    histogram, categories = _histograms(tallies)
    captured = [p.captured_at for p in profiles if p.captured_at]

    return LeakReport(
        generated_at=max(captured) if captured else "",
        config=config.as_dict(),
        findings=findings,
        histogram=histogram,
        categories=categories,
        suppressed=dict(sorted(suppressed.items())),
        profiles=P,
        unclassified=sum(t.unclassified for t in tallies),
    )
