"""
Relatórios do LeakProf: JSON versionado, texto legível e PDF
"""
import json
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import cm
from reportlab.platypus import SimpleDocTemplate, Table, TableStyle, Paragraph, Spacer, Preformatted
from reportlab.lib.enums import TA_CENTER

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import MAX_REPRESENTATIVE_FRAMES, REPORT_BASENAME
from app.leakprof import LeakReport, SiteStats
from app.logger import log_info


def _frame_dict(frame) -> dict:
    return {'symbol': frame.symbol, 'location': str(frame.location)}


def finding_to_dict(stats: SiteStats) -> dict:
    instance, record = stats.representative
    return {
        'kind': stats.site.kind.value,
        'file': stats.site.location.file,
        'line': stats.site.location.line,
        'function': stats.site.function,
        'total': stats.total,
        'max_count': stats.max_count,
        'rms': stats.rms,
        'per_instance': [{'instance': inst, 'count': count} for inst, count in stats.per_instance_counts],
        'representative': {
            'instance': instance,
            'goroutine': record.id,
            'state': record.state_label,
            'frames': [_frame_dict(f) for f in record.frames[:MAX_REPRESENTATIVE_FRAMES]],
            'created_by': _frame_dict(record.created_by) if record.created_by else None,
        },
    }


def report_to_dict(report: LeakReport) -> dict:
    """Estrutura do JSON (ver docs/report_schema.md)."""
    return {
        'schema_version': report.schema_version,
        'generated_at': report.generated_at,
        'profiles': report.profiles,
        'unclassified': report.unclassified,
        'config': report.config,
        'findings': [finding_to_dict(s) for s in report.findings],
        'histogram': {k: {'count': c, 'percent': round(p, 4)} for k, (c, p) in report.histogram.items()},
        'categories': {k: {'count': c, 'percent': round(p, 4)} for k, (c, p) in report.categories.items()},
        'suppressed': report.suppressed,
    }


def render_json(report: LeakReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"


def findings_dataframe(findings: List[dict]) -> pd.DataFrame:
    """Achados (já em dicionário) como DataFrame para tabela/texto/dashboard."""
    columns = ['#', 'kind', 'location', 'function', 'total', 'max', 'rms', 'instances']
    rows = []
    for i, f in enumerate(findings, 1):
        rows.append({
            '#': i,
            'kind': f['kind'],
            'location': f"{f['file']}:{f['line']}",
            'function': f['function'],
            'total': f['total'],
            'max': f.get('max_count', max((p['count'] for p in f['per_instance']), default=0)),
            'rms': f"{f['rms']:.2f}",
            'instances': len(f['per_instance']),
        })
    return pd.DataFrame(rows, columns=columns)


def histogram_dataframe(histogram: Dict[str, dict], label: str = 'kind') -> pd.DataFrame:
    rows = [{label: k, 'count': v['count'], 'percent': f"{v['percent']:.2f}%"} for k, v in histogram.items()]
    return pd.DataFrame(rows, columns=[label, 'count', 'percent'])


def render_text(report: LeakReport) -> str:
    """Versão legível do relatório (mesmo conteúdo do JSON, sem as pilhas completas)."""
    data = report_to_dict(report)
    cfg = data['config']
    out = [
        "LEAK REPORT",
        f"schema_version: {data['schema_version']}",
        f"generated_at: {data['generated_at'] or '-'}",
        f"profiles: {data['profiles']}",
        f"threshold: {cfg.get('threshold')} | top_n: {cfg.get('top_n')}",
        f"transient_symbols: {', '.join(cfg.get('transient_symbols', [])) or '-'}",
        "",
        f"FINDINGS ({len(data['findings'])})",
    ]
    if data['findings']:
        out.append(findings_dataframe(data['findings']).to_string(index=False))
        for i, finding in enumerate(data['findings'], 1):
            rep = finding['representative']
            out.append("")
            out.append(f"[{i}] {finding['kind']} @ {finding['file']}:{finding['line']} "
                       f"bloqueia {finding['total']} goroutine(s); representante: "
                       f"{rep['instance']} goroutine {rep['goroutine']} [{rep['state']}]")
            for frame in rep['frames']:
                out.append(f"    {frame['symbol']}")
                out.append(f"        {frame['location']}")
    else:
        out.append("nenhum local suspeito")

    out.append("")
    out.append("BLOCKING TYPES")
    out.append(histogram_dataframe(data['categories'], 'type').to_string(index=False))
    out.append("")
    out.append("SUPPRESSED")
    if data['suppressed']:
        for function, total in data['suppressed'].items():
            out.append(f"{function}: {total}")
    else:
        out.append("-")
    if data['unclassified']:
        out.append("")
        out.append(f"unclassified: {data['unclassified']}")
    return "\n".join(out) + "\n"


def generate_pdf_report(report: LeakReport, filepath) -> Path:
    """
    Gera o relatório em PDF.

    Args:
        report: Relatório já calculado
        filepath: Caminho do arquivo PDF

    Returns:
        Caminho do arquivo gerado
    """
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    data = report_to_dict(report)

    # invariant=1: sem data de criação nem id aleatório no PDF
    doc = SimpleDocTemplate(
        str(filepath),
        pagesize=A4,
        rightMargin=2*cm,
        leftMargin=2*cm,
        topMargin=2*cm,
        bottomMargin=2*cm,
        invariant=1,
        title="Leak Report",
    )

    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'ReportTitle',
        parent=styles['Heading1'],
        fontSize=18,
        alignment=TA_CENTER,
        spaceAfter=30,
        textColor=colors.HexColor('#1a365d')
    )
    heading_style = ParagraphStyle(
        'ReportHeading',
        parent=styles['Heading2'],
        fontSize=14,
        spaceAfter=12,
        textColor=colors.HexColor('#2d3748')
    )
    normal_style = styles['Normal']
    code_style = ParagraphStyle('Stack', parent=styles['Code'], fontSize=7, leading=9)

    elements = []
    elements.append(Paragraph("Relatório de Goroutines Bloqueadas", title_style))
    elements.append(Paragraph(f"<b>Perfis analisados:</b> {data['profiles']}", normal_style))
    elements.append(Paragraph(f"<b>Capturado em:</b> {data['generated_at'] or '-'}", normal_style))
    elements.append(Paragraph(
        f"<b>Limiar:</b> {data['config'].get('threshold')} &nbsp; <b>Top N:</b> {data['config'].get('top_n')}",
        normal_style))
    elements.append(Spacer(1, 20))

    header_style = [
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#4299e1')),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.white),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, -1), 8),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.HexColor('#e2e8f0')),
        ('TOPPADDING', (0, 1), (-1, -1), 4),
        ('BOTTOMPADDING', (0, 1), (-1, -1), 4),
    ]

    elements.append(Paragraph("Locais suspeitos", heading_style))
    if data['findings']:
        df = findings_dataframe(data['findings'])
        table_data = [list(df.columns)] + [[str(v) for v in row] for row in df.itertuples(index=False)]
        table = Table(table_data, colWidths=[0.8*cm, 2*cm, 4.5*cm, 4*cm, 1.5*cm, 1.5*cm, 1.6*cm, 1.4*cm])
        table.setStyle(TableStyle(header_style))
        elements.append(table)
        for i, finding in enumerate(data['findings'], 1):
            rep = finding['representative']
            stack = "\n".join(f"{f['symbol']}\n    {f['location']}" for f in rep['frames'])
            elements.append(Spacer(1, 10))
            elements.append(Paragraph(
                f"<b>[{i}]</b> {finding['kind']} em {finding['file']}:{finding['line']} "
                f"(representante: {rep['instance']}, goroutine {rep['goroutine']})", normal_style))
            elements.append(Preformatted(stack, code_style))
    else:
        elements.append(Paragraph("Nenhum local acima do limiar.", normal_style))
    elements.append(Spacer(1, 20))

    elements.append(Paragraph("Tipos de bloqueio", heading_style))
    hist = histogram_dataframe(data['categories'], 'tipo')
    hist_data = [list(hist.columns)] + [[str(v) for v in row] for row in hist.itertuples(index=False)]
    hist_table = Table(hist_data, colWidths=[7*cm, 3*cm, 3*cm])
    hist_table.setStyle(TableStyle(header_style))
    elements.append(hist_table)

    if data['suppressed']:
        elements.append(Spacer(1, 20))
        elements.append(Paragraph("Suprimidos", heading_style))
        sup_data = [["função", "goroutines"]] + [[k, str(v)] for k, v in data['suppressed'].items()]
        sup_table = Table(sup_data, colWidths=[10*cm, 3*cm])
        sup_table.setStyle(TableStyle(header_style))
        elements.append(sup_table)

    doc.build(elements)
    return filepath


def write_report(report: LeakReport, out_dir, formats=('json', 'text'), pdf: bool = False,
                 basename: str = REPORT_BASENAME) -> Dict[str, Path]:
    """
    Grava o relatório em disco.

    Returns:
        Dict formato → caminho gravado
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}
    if 'json' in formats:
        written['json'] = out_dir / f"{basename}.json"
        written['json'].write_text(render_json(report), encoding='utf-8')
    if 'text' in formats:
        written['text'] = out_dir / f"{basename}.txt"
        written['text'].write_text(render_text(report), encoding='utf-8')
    if pdf:
        written['pdf'] = generate_pdf_report(report, out_dir / f"{basename}.pdf")
    log_info("analyzer", f"REPORT_WRITTEN | dir={out_dir} | files={','.join(sorted(written))}")
    return written


def load_report_json(path) -> Optional[dict]:
    """Lê um relatório JSON gravado por write_report (None se não for um relatório)."""
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError):
        return None
    if not isinstance(data, dict) or 'findings' not in data:
        return None
    return data
