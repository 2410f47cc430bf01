from channel_app.exceptions import InputError
from cli_app.management.base import OneshotCommand, Outcome
from coding_app import bounds, hypothesis_testing, metaconverse
from coding_app.api.serializers import BoundReportSerializer, CheckSerializer, MinMaxReportSerializer

CHECKS = ('theorem3', 'chain', 'centered', 'lemma4', 'induction', 'appendix-b', 'nsbox')


class Command(OneshotCommand):
    help = 'Verify one of the approximation or duality statements on a channel; exits 2 when it fails.'

    def add_arguments(self, parser):
        self.add_channel_argument(parser)
        self.add_k_argument(parser)
        parser.add_argument('--l', type=int, help='messages compared against S^NS(W, k) (default k)')
        parser.add_argument('--check', choices=CHECKS, default='theorem3')
        parser.add_argument('--subset', help='comma-separated inputs for lemma4 (default: every greedy prefix)')
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--enum-cap', type=int, default=None)

    def compute(self, options):
        blobs = []
        channel = self.load_channel(options, blobs)
        k, check, tol = options['k'], options['check'], options['tol']
        l = options['l'] or k

        if check in ('theorem3', 'chain'):
            verifier = bounds.verify_theorem3 if check == 'theorem3' else bounds.verify_chain
            report = verifier(channel, k, l, tolerance=tol, enumeration_cap=options['enum_cap'])
            return self.outcome(check, report.passed, BoundReportSerializer(report).data, blobs)
        if check == 'appendix-b':
            report = hypothesis_testing.verify_appendix_b(channel, k, tolerance=tol if tol is not None else 1e-6)
            return self.outcome(check, report.passed, MinMaxReportSerializer(report).data, blobs)

        if check == 'centered':
            checks = (bounds.verify_centered(channel, k, tolerance=tol, enumeration_cap=options['enum_cap']),)
        elif check == 'lemma4':
            checks = self.lemma4(channel, k, options['subset'], tol)
        elif check == 'induction':
            checks = bounds.verify_induction(channel, k, tolerance=tol)
        else:
            checks = bounds.verify_box(channel, k, tolerance=tol if tol is not None else 1e-9)
        passed = all(item.passed for item in checks)
        return self.outcome(check, passed, {'checks': CheckSerializer(checks, many=True).data}, blobs)

    @staticmethod
    def lemma4(channel, k, subset, tol):
        if not subset:
            return bounds.verify_lemma4_greedy(channel, k, tolerance=tol)
        try:
            members = [int(item) for item in subset.split(',')]
        except ValueError as exc:
            raise InputError(f"--subset must list integers, got {subset!r}") from exc
        p = metaconverse.ns_value(channel, k).p
        return (bounds.verify_lemma4(channel, members, p, tolerance=tol),)

    @staticmethod
    def outcome(check, passed, report, blobs):
        return Outcome(payload={'check': check, 'passed': passed, 'report': report}, blobs=blobs, passed=passed)
