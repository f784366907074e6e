from typing import Mapping, Sequence, Tuple

Point = Tuple[float, float]


def _fixed_label(fixed: Mapping[int, float], precision: int) -> str:
    if not fixed:
        return "none"
    return ", ".join(f"r{i}={fixed[i]:.{precision}f}" for i in sorted(fixed))


def polygon_csv(points: Sequence[Point], free: Sequence[int], fixed: Mapping[int, float],
                precision: int = 6) -> str:
    """
    Slice polygon as CSV rows "x,y".

    - The first line is a comment naming the fixed coordinates and which rates x and y are.
    - The polygon is closed by repeating its first vertex, so plotting tools draw every edge.
    """
    lines = [
        f"# slice with fixed {_fixed_label(fixed, precision)}; x = r{free[0]}, y = r{free[1]}",
        "x,y",
    ]
    closed = list(points) + list(points[:1]) if len(points) > 2 else list(points)
    for x, y in closed:
        lines.append(f"{x:.{precision}f},{y:.{precision}f}")
    return "\n".join(lines) + "\n"


def gnuplot_script(csv_path: str, free: Sequence[int], fixed: Mapping[int, float],
                   precision: int = 6) -> str:
    """gnuplot commands that draw the polygon stored at csv_path."""
    lines = [
        "set datafile separator ','",
        "set key off",
        f"set title 'rate region slice ({_fixed_label(fixed, precision)})'",
        f"set xlabel 'R{free[0]} (bits)'",
        f"set ylabel 'R{free[1]} (bits)'",
        "set xrange [0:*]",
        "set yrange [0:*]",
        "set style fill transparent solid 0.3",
        f"plot '{csv_path}' every ::1 using 1:2 with filledcurves closed lc rgb '#4682b4', \\",
        f"     '{csv_path}' every ::1 using 1:2 with linespoints lc rgb '#000000' pt 7",
    ]
    return "\n".join(lines) + "\n"
