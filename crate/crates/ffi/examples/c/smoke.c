/* Minimal C consumer: build one trajectory and print its endpoints.
 *
 *   cargo build -p bohmsim-ffi
 *   cc examples/c/smoke.c -Iinclude -L../../target/debug -lbohmsim_ffi -lm -o smoke
 */
#include <stdio.h>
#include <stdlib.h>
#include "bohmsim.h"

static const char *CONFIG =
    "[wavefunction]\n"
    "sector = \"dirac\"\n"
    "masses = [1.0]\n"
    "[[wavefunction.terms]]\n"
    "coefficient = [1.0, 0.0]\n"
    "[[wavefunction.terms.factors]]\n"
    "kind = \"packet\"\n"
    "center = 0.0\n"
    "momentum = 0.4\n"
    "width = 0.25\n";

int main(void) {
  BohmWaveFunction *wf = NULL;
  BohmFoliation *fol = NULL;
  BohmTrajectory *traj = NULL;
  double x0 = 0.3;

  if (bohm_wavefunction_from_toml(CONFIG, &wf) != BohmStatus_Ok ||
      bohm_foliation_from_toml(CONFIG, &fol) != BohmStatus_Ok ||
      bohm_trajectory_integrate(wf, fol, &x0, 1, 0.0, 1.0, 0.01, &traj) !=
          BohmStatus_Ok) {
    fprintf(stderr, "error: %s\n", bohm_last_error_message());
    return 1;
  }

  size_t leaves = 0;
  bohm_trajectory_leaf_count(traj, &leaves);
  double t, x;
  bohm_trajectory_point(traj, leaves - 1, 0, &t, &x);
  printf("trajectory from x=%.3f reaches (t=%.3f, x=%.6f) over %zu leaves\n",
         x0, t, x, leaves);

  bohm_trajectory_free(traj);
  bohm_foliation_free(fol);
  bohm_wavefunction_free(wf);
  return 0;
}
