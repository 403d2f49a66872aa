"""
Именованные проверки (suites): перебор инвариантов до заданной границы.

Каждая проверка возвращает (ok, сообщение, payload); нарушения - данные,
а не исключения. Граница - N (индекс) или L (длина слова), см. SUITES.
"""

import itertools
import logging
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config import default_jobs, default_max_len
from services.bitseq import SeqId, BinaryWord, generate_prefix, period_doubling_morphic, popcount, run_count, to_binary
from services.errors import OversizeError, PalinrulerError
from services.levelang import (
    dfa_for_run_count, is_isomorphic, learn_level_set_dfa, level_set, minimize, verify_dfa,
)
from services.maskcalc import (
    MaskKind, OpSequence, all_masks, apply_mask, compose_b_as_three_a, distance_table,
    min_ops_type_a, prefix_flip_sequence,
)
from services.palfactor import (
    brute_pal_intervals, enumerate_pal_factors, is_pal_factor_a, is_pal_factor_b,
    pal_starts_mask_a, pal_starts_mask_b, pal_suffixes_a, pal_suffixes_b, suffix_to_mask,
)
from services.pallen import (
    check_bounds_b, check_prop3, compare_mixed_min, kernel_rank_profile, pal_length_a,
    pal_length_b, pal_length_bruteforce, pal_length_eertree, table_for,
)

logger = logging.getLogger(__name__)

SuiteResult = Tuple[bool, str, dict]
Progress = Optional[Callable[[int, int], None]]

# Сколько нарушений попадает в отчёт (счётчик - полный)
MAX_LISTED = 100


def _result(suite: str, bound: int, violations: List, **extra) -> SuiteResult:
    payload = {
        'suite': suite,
        'bound': bound,
        'violation_count': len(violations),
        'violations': violations[:MAX_LISTED],
    }
    payload.update(extra)
    if violations:
        return False, f"{suite}: {len(violations)} violations up to {bound}", payload
    return True, f"{suite}: no violations up to {bound}", payload


def _one_step_growth(values: np.ndarray) -> List[int]:
    steps = np.diff(values.astype(np.int64))
    return [int(k + 1) for k in np.nonzero(steps > 1)[0]]


def _starts_by_end(word) -> Dict[int, set]:
    grouped = defaultdict(set)
    for i, j in brute_pal_intervals(word):
        grouped[j].add(i)
    return grouped


# ==================== ТАБЛИЦЫ pl ====================

def suite_theorem1(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """pl_a = c поэлементно (переборный оракул), чётность и рост не более чем на 1"""
    word = generate_prefix(SeqId.RULER, bound)
    brute = pal_length_bruteforce(word, 'ruler')
    fast = pal_length_a(bound)

    violations = [
        {'n': int(n), 'bruteforce': int(brute.values[n]), 'run_count': int(fast.values[n])}
        for n in np.nonzero(brute.values != fast.values)[0]
    ]
    idx = np.arange(bound + 1)
    parity = [int(n) for n in np.nonzero((fast.values.astype(np.int64) - idx) & 1)[0]]
    growth = _one_step_growth(brute.values)
    violations += [{'n': n, 'parity': 'pl_a[n] and n differ mod 2'} for n in parity]
    violations += [{'n': n, 'growth': 'pl[n] > pl[n-1] + 1'} for n in growth]
    return _result('theorem1', bound, violations)


def suite_theorem2_bounds(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """floor(c/3) <= pl_b <= c, быстрый путь против оракула, pl_b <= pl_a, рост"""
    table = pal_length_b(bound)
    report = check_bounds_b(bound, table)
    violations = list(report.violations)

    oracle_limit = min(bound, 1 << 14)
    brute = pal_length_bruteforce(generate_prefix(SeqId.PERIOD_DOUBLING, oracle_limit), 'period_doubling')
    fast_prefix = table.values[:oracle_limit + 1]
    for n in np.nonzero(brute.values != fast_prefix)[0]:
        violations.append({'n': int(n), 'fast': int(fast_prefix[n]), 'bruteforce': int(brute.values[n])})

    pl_a = pal_length_a(bound)
    for n in np.nonzero(table.values > pl_a.values)[0]:
        violations.append({'n': int(n), 'pl_b': int(table.values[n]), 'pl_a': int(pl_a.values[n])})
    violations += [{'n': n, 'growth': 'pl[n] > pl[n-1] + 1'} for n in _one_step_growth(table.values)]

    extra = {'bounds': report.to_dict(), 'oracle_checked_up_to': oracle_limit}
    if bound >= 8 * 16 + 8:
        extra['kernel_rank'] = kernel_rank_profile(table, depth=3, window=16)
    return _result('theorem2-bounds', bound, violations, **extra)


def suite_eertree(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """Два переборных оракула совпадают на префиксах a, b и c"""
    violations = []
    for seq in SeqId:
        word = generate_prefix(seq, bound)
        scan = pal_length_bruteforce(word, seq.value)
        tree = pal_length_eertree(word, seq.value)
        for n in np.nonzero(scan.values != tree.values)[0]:
            violations.append({'sequence': seq.value, 'n': int(n),
                               'scan': int(scan.values[n]), 'eertree': int(tree.values[n])})
    return _result('eertree', bound, violations)


def suite_mixed_min(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """Описательное сравнение pl_b с минимумом масок A/B; проверяется только воспроизведение решений"""
    report = compare_mixed_min(bound, max_len=max_len, progress=progress)
    violations = [{'n': n, 'replay': 'mask solution does not reach zero'} for n in report['replay_failures']]
    logger.info(f"Mixed minimum up to {bound}: {report['equal']} equal, "
                f"{report['mixed_below_pl']} below, {report['mixed_above_pl']} above pl_b")
    extra = {k: v for k, v in report.items() if k not in ('N', 'replay_failures')}
    return _result('mixed-min', bound, violations, **extra)


def suite_prop3(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    report = check_prop3(bound)
    violations = [{'n': n, 'runs': run_count(n)} for n in report['corrected_violations']]
    extra = {k: v for k, v in report.items() if k not in ('N', 'corrected_violations')}
    return _result('prop3', bound, violations, **extra)


# ==================== ФАКТОРЫ: ЗАМКНУТЫЕ ФОРМЫ ПРОТИВ ПЕРЕБОРА ====================

def _factor_chunk(args: Tuple[str, int, int, int]) -> List[dict]:
    """Сверка предиката для j в [lo, hi) со всеми палиндромами слова длины bound"""
    seq_name, bound, lo, hi = args
    seq = SeqId(seq_name)
    word = generate_prefix(seq, bound)
    starts_by_end = _starts_by_end(word)
    vector = pal_starts_mask_a if seq is SeqId.RULER else pal_starts_mask_b
    scalar = is_pal_factor_a if seq is SeqId.RULER else is_pal_factor_b

    found = []
    for j in range(lo, hi):
        starts = np.arange(1, j + 1, dtype=np.int64)
        closed = vector(j, starts)
        actual = np.zeros(j, dtype=bool)
        actual[[i - 1 for i in starts_by_end[j]]] = True
        for k in np.nonzero(closed != actual)[0]:
            found.append({'i': int(k + 1), 'j': j, 'closed_form': bool(closed[k]), 'bruteforce': bool(actual[k])})
        # скалярный предикат - на коротких префиксах
        if j <= 512:
            for k in range(j):
                if scalar(k + 1, j) != bool(actual[k]):
                    found.append({'i': k + 1, 'j': j, 'scalar': not actual[k], 'bruteforce': bool(actual[k])})
    return found


def _chunks(bound: int, parts: int) -> List[Tuple[int, int]]:
    # Куски примерно равной работы: проверка для j стоит O(j)
    edges = sorted({1 + int(round(bound * (k / parts) ** 0.5)) for k in range(parts + 1)} | {1, bound + 1})
    return [(lo, hi) for lo, hi in zip(edges, edges[1:]) if lo < hi]


def _factor_sweep(suite: str, seq: SeqId, bound: int, jobs: int, progress: Progress) -> SuiteResult:
    jobs = max(1, jobs)
    pieces = _chunks(bound, jobs * 4)
    tasks = [(seq.value, bound, lo, hi) for lo, hi in pieces]
    violations: List[dict] = []

    if jobs == 1:
        results = map(_factor_chunk, tasks)
        for done, found in enumerate(results, start=1):
            violations.extend(found)
            if progress:
                progress(done, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map сохраняет порядок кусков: отчёт не зависит от числа процессов
            for done, found in enumerate(pool.map(_factor_chunk, tasks), start=1):
                violations.extend(found)
                if progress:
                    progress(done, len(tasks))

    pairs = bound * (bound + 1) // 2
    return _result(suite, bound, violations, pairs_checked=pairs, chunks=len(tasks))


def suite_lemma3_oracle(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """is_pal_factor_b против прямой проверки для всех 1 <= i <= j <= bound"""
    return _factor_sweep('lemma3-oracle', SeqId.PERIOD_DOUBLING, bound, jobs, progress)


def suite_lemma2_oracle(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """is_pal_factor_a против прямой проверки для всех 1 <= i <= j <= bound"""
    return _factor_sweep('lemma2-oracle', SeqId.RULER, bound, jobs, progress)


def suite_prop2_oracle(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """
    Палиндромные суффиксы a и b из замкнутых форм против перебора (до 2^13),
    их маски A/B, вложение начал суффиксов a в начала суффиксов b (до 2^13)
    и |pal_suffixes_a(n)| = popcount(n) для всех n <= bound.
    """
    violations = []
    oracle_limit = min(bound, 1 << 13)

    for seq in (SeqId.RULER, SeqId.PERIOD_DOUBLING):
        brute = _starts_by_end(generate_prefix(seq, oracle_limit))
        closed = defaultdict(set)
        for factor in enumerate_pal_factors(seq, oracle_limit):
            closed[factor.j].add(factor.i)
            try:
                suffix_to_mask(factor.j, factor)
            except PalinrulerError as e:
                violations.append({'sequence': seq.value, 'n': factor.j, 'start': factor.i, 'mask': str(e)})
        for n in range(1, oracle_limit + 1):
            if closed[n] != brute[n]:
                violations.append({
                    'sequence': seq.value, 'n': n,
                    'missing': sorted(brute[n] - closed[n]), 'extra': sorted(closed[n] - brute[n]),
                })

    # начала палиндромных суффиксов a входят в начала суффиксов b
    for n in range(1, oracle_limit + 1):
        not_in_b = set(pal_suffixes_a(n)) - {factor.i for factor in pal_suffixes_b(n)}
        if not_in_b:
            violations.append({'sequence': SeqId.RULER.value, 'n': n, 'not_in_b': sorted(not_in_b)})

    for n in range(1, bound + 1):
        count = len(pal_suffixes_a(n))
        if count != popcount(n):
            violations.append({'sequence': SeqId.RULER.value, 'n': n, 'suffixes': count, 'popcount': popcount(n)})
        if progress and n % 4096 == 0:
            progress(n, bound)

    return _result('prop2-oracle', bound, violations, oracle_checked_up_to=oracle_limit)


def suite_morphic(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """b[n] = a[n] mod 2 совпадает с неподвижной точкой 0 -> 01, 1 -> 00"""
    morphic = period_doubling_morphic(bound)
    direct = generate_prefix(SeqId.PERIOD_DOUBLING, bound)
    violations = [
        {'n': int(k + 1), 'morphic': int(morphic[k]), 'valuation': int(direct[k])}
        for k in np.nonzero(morphic != direct)[0]
    ]
    return _result('morphic', bound, violations)


# ==================== МАСКИ ====================

def _sample_words(L: int) -> List[BinaryWord]:
    alternating = int('10' * L, 2) >> L
    return [BinaryWord.zeros(L), BinaryWord.of_value((1 << L) - 1, L), BinaryWord.of_value(alternating, L)]


def suite_lemma1(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """B(t, s) = A(t-1) + A(t+s-1) + A(t+s) для всех L <= bound; порядок применения не важен"""
    violations = []
    checked = 0
    for L in range(1, bound + 1):
        samples = _sample_words(L)
        for op in all_masks(L, (MaskKind.B,)):
            checked += 1
            parts = compose_b_as_three_a(op)
            if parts.combined_mask() != op.as_int():
                violations.append({'mask': str(op), 'xor_of_a': parts.combined_mask(), 'mask_word': op.as_int()})
                continue
            for word in samples:
                expected = apply_mask(op, word)
                for order in itertools.permutations(parts.ops):
                    if OpSequence(order, L).apply(word) != expected:
                        violations.append({'mask': str(op), 'word': str(word), 'order': [str(o) for o in order]})
    return _result('lemma1', bound, violations, masks_checked=checked)


def _check_length(bound: int, max_len: Optional[int]) -> None:
    limit = default_max_len() if max_len is None else max_len
    if bound > limit:
        raise OversizeError(f"word length bound {bound} exceeds max_len={limit}; raise --max-len or PALINRULER_MAX_LEN")


def _leading_one_runs(L: int) -> Tuple[np.ndarray, np.ndarray]:
    values = np.arange(1 << (L - 1), 1 << L, dtype=np.int64)
    runs = generate_prefix(SeqId.RUN_COUNT, (1 << L) - 1)[values - 1]
    return values, runs


def suite_prop1(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """Минимум масок A = число серий: построение, поиск в ширину, воспроизведение"""
    _check_length(bound, max_len)
    violations = []
    for L in range(1, bound + 1):
        values, runs = _leading_one_runs(L)
        dist = distance_table(L, (MaskKind.A,))
        for k in np.nonzero(dist[values] != runs)[0]:
            violations.append({'word': str(to_binary(int(values[k]))), 'bfs': int(dist[values[k]]), 'runs': int(runs[k])})

        for value, expected in zip(values.tolist(), runs.tolist()):
            word = to_binary(value)
            count, ops = min_ops_type_a(word)
            flips = prefix_flip_sequence(word)
            if count != expected or ops.combined_mask() != value:
                violations.append({'word': str(word), 'constructed': count, 'runs': expected})
            if len(flips) != expected or flips.combined_mask() != value:
                violations.append({'word': str(word), 'prefix_flips': len(flips), 'runs': expected})
        if progress:
            progress(L, bound)
    return _result('prop1', bound, violations, words_checked=(1 << bound) - 1)


def suite_cor1(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """Минимум масок A/B не меньше floor(runs/3); ceil(runs/3) - только статистика"""
    _check_length(bound, max_len)
    violations = []
    ceil_failures = 0
    for L in range(1, bound + 1):
        values, runs = _leading_one_runs(L)
        dist = distance_table(L)[values].astype(np.int64)
        for k in np.nonzero(dist < runs // 3)[0]:
            violations.append({'word': str(to_binary(int(values[k]))), 'mixed_min': int(dist[k]), 'runs': int(runs[k])})
        ceil_failures += int(np.count_nonzero(dist < -(-runs // 3)))
    return _result('cor1', bound, violations, ceil_lower_bound_failures=ceil_failures)


# ==================== АВТОМАТЫ ====================

def suite_prop6(bound: int, jobs: int = 1, progress: Progress = None, max_len: Optional[int] = None) -> SuiteResult:
    """Автоматы для c = m (m = 1..6), отрицательный контроль, обучение для m = 2"""
    table = table_for(SeqId.RUN_COUNT.value, bound)
    violations = []
    levels = []
    for m in range(1, 7):
        dfa = dfa_for_run_count(m)
        ls = level_set(table, m, bound)
        bad = verify_dfa(dfa, ls) + verify_dfa(minimize(dfa), ls)
        violations += [dict(item, m=m) for item in bad]
        levels.append({'m': m, 'members': len(ls.members), 'states': dfa.num_states})
        if progress:
            progress(m, 6)

    top = int(table.values.max())
    covered = sum(len(level_set(table, eps, bound).members) for eps in range(1, top + 1))
    if covered != bound:
        violations.append({'partition': f"level sets cover {covered} of {bound} indices"})

    control = dfa_for_run_count(2).with_transition(2, 1, 1)
    control_detected = bool(verify_dfa(control, level_set(table, 2, bound)))
    if bound >= 10 and not control_detected:
        violations.append({'control': 'corrupted automaton passed verification'})

    learn_bound = min(bound, 1 << 12)
    ok, message, learned = learn_level_set_dfa(lambda i: run_count(i) == 2, learn_bound, max_states=8)
    if not ok:
        violations.append({'learner': message})
    else:
        if not is_isomorphic(learned, minimize(dfa_for_run_count(2))):
            violations.append({'learner': f"learned {learned.num_states}-state automaton differs from the constructed one"})
        if verify_dfa(learned, level_set(table, 2, learn_bound)):
            violations.append({'learner': 'learned automaton fails its training bound'})

    return _result('prop6', bound, violations, levels=levels, control_detected=control_detected,
                   learner={'bound': learn_bound, 'message': message, 'conjecture': True})


# ==================== РЕЕСТР ====================

@dataclass(frozen=True)
class Suite:
    name: str
    run: Callable[..., SuiteResult]
    default_bound: int
    bound_kind: str
    description: str


SUITES: Dict[str, Suite] = {s.name: s for s in [
    Suite('theorem1', suite_theorem1, 1 << 16, 'N', 'pl_a equals run count (bruteforce oracle)'),
    Suite('theorem2-bounds', suite_theorem2_bounds, 1 << 16, 'N', 'floor(c/3) <= pl_b <= c, fast path vs oracle'),
    Suite('lemma3-oracle', suite_lemma3_oracle, 4096, 'N', 'b-palindrome closed form vs direct check, all pairs'),
    Suite('lemma2-oracle', suite_lemma2_oracle, 4096, 'N', 'a-palindrome closed form vs direct check, all pairs'),
    Suite('prop2-oracle', suite_prop2_oracle, 1 << 16, 'N', 'palindromic suffixes and their masks'),
    Suite('prop6', suite_prop6, 1 << 16, 'N', 'run-count level automata, m = 1..6'),
    Suite('lemma1', suite_lemma1, 10, 'L', 'B mask as three A masks'),
    Suite('prop1', suite_prop1, 14, 'L', 'A-only minimum equals run count'),
    Suite('cor1', suite_cor1, 14, 'L', 'mixed minimum >= floor(runs/3)'),
    Suite('mixed-min', suite_mixed_min, 1 << 14, 'N', 'pl_b vs mixed mask minimum (descriptive)'),
    Suite('prop3', suite_prop3, 1 << 16, 'N', 'run count <= floor(log2 n) + 1'),
    Suite('morphic', suite_morphic, 1 << 16, 'N', 'valuation parity vs substitution fixed point'),
    Suite('eertree', suite_eertree, 4096, 'N', 'palindromic tree vs suffix scan oracle'),
]}


class VerifyService:
    """Запуск проверок по имени"""

    @staticmethod
    def suite_names() -> List[str]:
        return list(SUITES)

    @staticmethod
    def run(name: str, bound: Optional[int] = None, jobs: Optional[int] = None,
            progress: Progress = None, max_len: Optional[int] = None) -> Tuple[bool, str, dict]:
        """payload['status']: pass, fail или error (ошибка предусловия)"""
        suite = SUITES.get(name)
        if suite is None:
            return False, f"unknown suite {name!r}", {'suite': name, 'status': 'error'}
        bound = suite.default_bound if bound is None else bound
        jobs = default_jobs() if jobs is None else jobs
        if bound < 1:
            return False, f"bound must be >= 1, got {bound}", {'suite': name, 'bound': bound, 'status': 'error'}

        logger.info(f"=== Suite {name} started: {suite.bound_kind}={bound}, jobs={jobs} ===")
        started = time.perf_counter()
        try:
            ok, message, payload = suite.run(bound, jobs, progress, max_len)
        except PalinrulerError as e:
            logger.error(f"Suite {name} precondition failed: {e}")
            return False, str(e), {'suite': name, 'bound': bound, 'status': 'error', 'error': str(e)}

        elapsed = time.perf_counter() - started
        payload['status'] = 'pass' if ok else 'fail'
        payload['bound_kind'] = suite.bound_kind
        log = logger.info if ok else logger.warning
        log(f"=== Suite {name} finished: {payload['violation_count']} violations, {elapsed:.1f}s ===")
        return ok, message, payload
