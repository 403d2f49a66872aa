#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Командная строка palinruler.

    gen SEQ N             члены ruler, period-doubling, run-count, pl-a, pl-b (CSV/JSON)
    verify SUITE [BOUND]  именованная проверка инвариантов, отчёт JSON
    oeis-check PATH [SEQ] сверка с локальным b-файлом
    levelset SEQ EPS N    множество уровня, обучение (--learn) или проверка (--dfa) автомата
    masks N               минимальные наборы масок A и A/B для двоичной записи N
    factors SEQ N         палиндромные факторы a или b

Коды выхода: 0 - успех, 1 - найдены нарушения (или обучение не удалось),
2 - ошибка использования, разбора или предусловия.
"""

import argparse
import csv
import json
import logging
import os
import re
import sys
import time
from typing import List, Optional

from config import LOG_FORMAT, default_jobs
from services.bfile import DOCUMENTED_OFFSETS, BFileService
from services.bitseq import SeqId, run_encode, to_binary
from services.errors import OversizeError, PalinrulerError
from services.levelang import (
    learn_level_set_dfa, level_set, membership_oracle, parse_dfa, serialize, verify_dfa,
)
from services.maskcalc import min_ops_mixed, min_ops_type_a, prefix_flip_sequence
from services.palfactor import enumerate_pal_factors
from services.pallen import pal_length_b, table_for
from services.report_service import Report, ReportService
from services.verify_service import SUITES, VerifyService

logger = logging.getLogger('palinruler.cli')

GEN_SEQUENCES = ('ruler', 'period-doubling', 'run-count', 'pl-a', 'pl-b')

# pl_b[N] в отчёте masks считается только для небольших N
MASKS_PL_LIMIT = 1 << 20


class UsageError(PalinrulerError):
    """Ошибка параметров командной строки (код выхода 2)"""


# ==================== РАЗБОР АРГУМЕНТОВ ====================

def _gen_sequence(value: str) -> str:
    key = value.strip().lower().replace('_', '-')
    if key not in GEN_SEQUENCES:
        raise argparse.ArgumentTypeError(f"unknown sequence {value!r}; choose from {', '.join(GEN_SEQUENCES)}")
    return key


def _factor_sequence(value: str) -> SeqId:
    try:
        seq = SeqId.parse(value)
    except PalinrulerError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    if seq is SeqId.RUN_COUNT:
        raise argparse.ArgumentTypeError("factors are enumerated for ruler (a) and period-doubling (b)")
    return seq


def _positive(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {number}")
    return number


def _add_report_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--save', action='store_true', help='store the report in DATABASE_URL')
    parser.add_argument('--output', metavar='PATH', help='also write the JSON report to PATH')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='palinruler', description='Palindromic length of the ruler and period-doubling sequences')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging on stderr')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='emit n,value rows for 1..N')
    gen.add_argument('seq', type=_gen_sequence)
    gen.add_argument('N', type=_positive)
    gen.add_argument('--format', choices=('csv', 'json'), default='csv')

    verify = sub.add_parser('verify', help='run a named invariant sweep')
    verify.add_argument('suite', choices=sorted(SUITES))
    verify.add_argument('bound', type=_positive, nargs='?', help='N (or word length L for lemma1, prop1, cor1)')
    verify.add_argument('--jobs', type=_positive, default=None, help='worker processes (PALINRULER_JOBS)')
    verify.add_argument('--max-len', type=_positive, default=None, help='word length cap for mask searches')
    _add_report_flags(verify)

    oeis = sub.add_parser('oeis-check', help='compare a local b-file with a sequence')
    oeis.add_argument('path')
    oeis.add_argument('seq', nargs='?', help='ruler, period-doubling or run-count (guessed from bNNNNNN.txt)')
    oeis.add_argument('--offset', type=int, default=None, help='our n = b-file index + OFFSET')
    _add_report_flags(oeis)

    levelset = sub.add_parser('levelset', help='level set {i <= N : f(i) = EPSILON}')
    levelset.add_argument('seq', type=_gen_sequence)
    levelset.add_argument('epsilon', type=_positive)
    levelset.add_argument('N', type=_positive)
    levelset.add_argument('--learn', type=_positive, metavar='MAX_STATES', help='learn an automaton with at most MAX_STATES states')
    levelset.add_argument('--dfa', metavar='PATH', help='verify the automaton stored at PATH')
    levelset.add_argument('--write-dfa', metavar='PATH', help='write the learned automaton to PATH')
    _add_report_flags(levelset)

    masks = sub.add_parser('masks', help='minimum mask sequences for bin(N)')
    masks.add_argument('N', type=_positive)
    masks.add_argument('--max-len', type=_positive, default=None, help='word length cap for the mixed search')
    _add_report_flags(masks)

    factors = sub.add_parser('factors', help='palindromic factors [i, j] with j <= N')
    factors.add_argument('seq', type=_factor_sequence)
    factors.add_argument('N', type=_positive)
    factors.add_argument('--format', choices=('csv', 'json'), default='csv')

    return parser


# ==================== ПОТОКИ ДАННЫХ ====================

def cmd_gen(args, out) -> int:
    table = table_for(args.seq, args.N)
    if args.format == 'csv':
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['n', 'value'])
        writer.writerows(table.to_rows())
    else:
        document = {
            'schema_version': 'v1',
            'sequence': args.seq,
            'N': args.N,
            'rows': [{'n': n, 'value': value} for n, value in table.to_rows()],
        }
        out.write(json.dumps(document, sort_keys=True) + '\n')
    return 0


def cmd_factors(args, out) -> int:
    factors = enumerate_pal_factors(args.seq, args.N)
    if args.format == 'csv':
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['i', 'j', 'form', 'o', 'v1', 'v2', 'x'])
        for f in factors:
            writer.writerow([f.i, f.j, f.form.value, f.o, f.v1, '' if f.v2 is None else f.v2, f.x])
    else:
        document = {
            'schema_version': 'v1',
            'sequence': args.seq.value,
            'N': args.N,
            'factors': [f.to_dict() for f in factors],
        }
        out.write(json.dumps(document, sort_keys=True) + '\n')
    return 0


# ==================== ОТЧЁТЫ ====================

def _finish(report: Report, args, out, subject: str, bound: Optional[int]) -> Report:
    out.write(report.to_json())
    if args.output:
        ok, message = ReportService.write(report, args.output)
        if not ok:
            logger.error(message)
    if args.save:
        # Контекст приложения нужен только для записи в БД
        from app import app
        with app.app_context():
            saved, message, _ = ReportService.save(report, subject, bound)
        (logger.info if saved else logger.error)(message)
    return report


def cmd_verify(args, out) -> Report:
    suite = SUITES[args.suite]
    bound = args.bound or suite.default_bound
    jobs = args.jobs or default_jobs()
    command = ['verify', args.suite, str(bound)]
    report = ReportService.run_timed(
        command, {'suite': args.suite, 'bound': bound, 'bound_kind': suite.bound_kind, 'max_len': args.max_len},
        VerifyService.run, args.suite, bound, jobs, None, args.max_len,
    )
    return _finish(report, args, out, args.suite, bound)


def _guess_bfile(path: str):
    match = re.search(r'b(\d{6})', os.path.basename(path))
    if match:
        return DOCUMENTED_OFFSETS.get(f"A{match.group(1)}")
    return None


def cmd_oeis_check(args, out) -> Report:
    guess = _guess_bfile(args.path)
    seq = args.seq or (guess[0] if guess else None)
    if seq is None:
        raise UsageError(f"cannot infer the sequence for {args.path}; pass SEQ")
    seq = SeqId.parse(seq).value
    offset = args.offset
    if offset is None:
        offset = guess[1] if guess and guess[0] == seq else 0
    command = ['oeis-check', args.path, seq, f'--offset={offset}']
    report = ReportService.run_timed(
        command, {'path': args.path, 'sequence': seq, 'offset': offset},
        BFileService.check, args.path, seq, offset,
    )
    return _finish(report, args, out, seq, None)


def _levelset_result(args) -> tuple:
    table = table_for(args.seq, args.N)
    ls = level_set(table, args.epsilon, args.N)
    payload = {
        'sequence': args.seq,
        'epsilon': args.epsilon,
        'N': args.N,
        'members': list(ls.members),
        'size': len(ls.members),
    }
    ok = True
    messages = [f"{len(ls.members)} members up to {args.N}"]

    if args.dfa:
        if not os.path.isfile(args.dfa):
            raise UsageError(f"automaton file not found: {args.dfa}")
        with open(args.dfa, encoding='utf-8') as handle:
            dfa = parse_dfa(handle.read())
        mismatches = verify_dfa(dfa, ls)
        payload['dfa_check'] = {'path': args.dfa, 'states': dfa.num_states,
                                'mismatch_count': len(mismatches), 'mismatches': mismatches[:100]}
        ok = ok and not mismatches
        messages.append(f"automaton: {len(mismatches)} mismatches")

    if args.learn:
        membership = membership_oracle(args.seq, args.epsilon, args.N)
        try:
            learned_ok, message, learned = learn_level_set_dfa(membership, args.N, args.learn)
        except OversizeError as e:
            learned_ok, message, learned = False, str(e), None
        payload['learned'] = {'ok': learned_ok, 'message': message, 'conjecture': True, 'verified_up_to': args.N}
        if learned is not None:
            payload['learned'].update(states=learned.num_states, dfa=serialize(learned),
                                      training_mismatches=len(verify_dfa(learned, ls)))
        ok = ok and learned_ok
        messages.append(message)

    return ok, '; '.join(messages), payload


def cmd_levelset(args, out) -> Report:
    command = ['levelset', args.seq, str(args.epsilon), str(args.N)]
    if args.learn:
        command.append(f'--learn={args.learn}')
    if args.dfa:
        command.append(f'--dfa={args.dfa}')
    report = ReportService.run_timed(
        command, {'sequence': args.seq, 'epsilon': args.epsilon, 'N': args.N, 'learn': args.learn, 'dfa': args.dfa},
        _levelset_result, args,
    )

    learned = report.payload.get('learned', {})
    if args.write_dfa and learned.get('dfa'):
        with open(args.write_dfa, 'w', encoding='utf-8') as handle:
            handle.write(learned['dfa'])
    _finish(report, args, out, args.seq, args.N)

    if args.save and learned.get('dfa'):
        from app import app
        with app.app_context():
            ReportService.save_automaton(args.seq, args.epsilon, args.N, learned['dfa'], learned['states'])
    return report


def _masks_result(args) -> tuple:
    word = to_binary(args.N)
    encoding = run_encode(word)
    a_count, a_ops = min_ops_type_a(word)
    payload = {
        'n': args.N,
        'word': str(word),
        'runs': {'first_bit': encoding.first_bit, 'lengths': list(encoding.run_lengths)},
        'type_a': {'count': a_count, 'masks': [str(op) for op in a_ops]},
        'prefix_flips': [str(op) for op in prefix_flip_sequence(word)],
    }
    try:
        mixed_count, mixed_ops = min_ops_mixed(word, args.max_len)
        payload['mixed'] = {'count': mixed_count, 'masks': [str(op) for op in mixed_ops]}
    except OversizeError as e:
        payload['mixed'] = {'error': str(e)}
    if args.N <= MASKS_PL_LIMIT:
        payload['pl_b'] = pal_length_b(args.N)[args.N]
    return True, f"bin({args.N}) = {word}: {a_count} runs", payload


def cmd_masks(args, out) -> Report:
    command = ['masks', str(args.N)]
    report = ReportService.run_timed(command, {'n': args.N, 'max_len': args.max_len}, _masks_result, args)
    return _finish(report, args, out, 'masks', args.N)


# ==================== ТОЧКА ВХОДА ====================

def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT)
    logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)

    started = time.perf_counter()
    try:
        if args.command == 'gen':
            return cmd_gen(args, out)
        if args.command == 'factors':
            return cmd_factors(args, out)
        handlers = {
            'verify': cmd_verify,
            'oeis-check': cmd_oeis_check,
            'levelset': cmd_levelset,
            'masks': cmd_masks,
        }
        report = handlers[args.command](args, out)
        logger.debug(f"{args.command} finished in {time.perf_counter() - started:.2f}s: {report.status}")
        if report.status == 'error':
            print(f"palinruler: {report.message}", file=sys.stderr)
        return report.exit_code
    except PalinrulerError as e:
        print(f"palinruler: {e}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
