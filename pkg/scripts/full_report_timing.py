"""Wall time of each suite and of the full report, serial and threaded."""

import time

from ptscarf.report import RunConfig, run_full_report


def main():
    for parallel in (False, True):
        start = time.perf_counter()
        rep = run_full_report(RunConfig(parallel=parallel))
        total = time.perf_counter() - start
        print(f"parallel={parallel}: {total:.2f} s, passed={rep['passed']}")
        for name, secs in rep["timing"]["suites"].items():
            print(f"  {name:24s} {secs:7.2f} s")
        failed = [c["id"] for c in rep["checks"] if not c["passed"] and not c["informational"]]
        print(f"  failing checks: {failed}")


if __name__ == "__main__":
    main()
