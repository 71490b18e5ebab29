"""
Harness

실험 실행과 산출물:
- key = value 시나리오 설정
- 하위 명령별 실험과 검사 결과
- CSV / SVG 출력, failure manifest
"""

from .config import ScenarioConfig, load_config, parse_assignments

from .emit import csv_header, emit, emit_outcome, write_failures

from .experiments import EXPERIMENTS, Outcome

__all__ = [
    # Config
    'ScenarioConfig',
    'load_config',
    'parse_assignments',

    # Emission
    'csv_header',
    'emit',
    'emit_outcome',
    'write_failures',

    # Experiments
    'EXPERIMENTS',
    'Outcome',
]
