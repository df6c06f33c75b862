from typing import Dict, List

from models.task import TaskReport


class TaskMonitor:
    """Console rendering of task reports, planner comparisons and IK benchmarks."""

    def __init__(self, stream=None):
        self.stream = stream

    def _print(self, text: str = "") -> None:
        print(text, file=self.stream)

    def print_report(self, report: TaskReport):
        self._print(f"\nTask run (seed {report.seed}):")
        clock = 0.0
        for record in report.phases:
            failed = record.details.get("status") == "failed"
            marker = "❌" if failed or record.event.endswith(("Failed", "Timeout", "Diverged", "Slipped")) else "✅"
            self._print(f"  [{clock:8.3f}s] {marker} {record.phase:<22} -> {record.event}")
            if failed:
                self._print(f"             error: {record.details['error']}")
            clock += record.sim_time

        outcome = report.final_state if report.reason is None else f"{report.final_state}({report.reason})"
        self._print(f"\nFinal state: {outcome}")
        self._print(f"Simulated time: {report.total_sim_time:.3f}s")
        if report.object_position:
            x, y, z = report.object_position
            self._print(f"Object at: ({x:.3f}, {y:.3f}, {z:.3f})")

    def print_plan_comparison(self, rows: List[Dict]):
        self._print("\nHeuristic comparison:")
        self._print(f"  {'connectivity':<13}{'heuristic':<11}{'cost':>10}{'optimal':>10}{'expanded':>10}")
        for row in rows:
            cost = "-" if row["cost"] is None else f"{row['cost']:.3f}"
            optimal = "-" if row["optimal_cost"] is None else f"{row['optimal_cost']:.3f}"
            self._print(
                f"  {row['connectivity']:<13}{row['heuristic']:<11}{cost:>10}{optimal:>10}{row['nodes_expanded']:>10}"
            )

    def print_ik_bench(self, report: Dict[str, dict]):
        self._print("\nIK benchmark:")
        for name, stats in report.items():
            latency = stats["latency_ms"]
            self._print(
                f"  {name:<14} success {100.0 * stats['success_rate']:6.2f}%  "
                f"p50 {latency['p50']:7.3f}ms  p90 {latency['p90']:7.3f}ms  p99 {latency['p99']:7.3f}ms"
            )
