"""
Driving the solver from Matrix Market files
===========================================

Write a sparse matrix to disk, run the command-line solver on it and read the
factors back. The exit code reports convergence (0), an exhausted basis
budget (2) or an error (1).
"""

import pathlib
import subprocess
import sys
import tempfile

import numpy as np
import scipy.io
import scipy.sparse

from bivkrylov.mmio import read_matrix_market

work = pathlib.Path(tempfile.mkdtemp())
n = 200
A = scipy.sparse.diags([-np.ones(n - 1), 2.5 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
scipy.io.mmwrite(work / "A.mtx", A)

cmd = [sys.executable, "-m", "bivkrylov", "solve", "--A", str(work / "A.mtx"),
       "--function", "sylvester", "--tol", "1e-10", "--out", str(work / "out")]
proc = subprocess.run(cmd, capture_output=True, text=True)
print("exit code:", proc.returncode)
print((work / "out" / "trace.csv").read_text().splitlines()[-4:])

U = read_matrix_market(work / "out" / "U.mtx")
X = read_matrix_market(work / "out" / "X.mtx")
V = read_matrix_market(work / "out" / "V.mtx")
print("factor shapes:", U.shape, X.shape, V.shape)

# a tiny budget stops early but still writes what it has
proc = subprocess.run(cmd[:-2] + ["--k-max", "3", "--out", str(work / "short")])
print("exit code with --k-max 3:", proc.returncode)
