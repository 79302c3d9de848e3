#include <math.h>
#include <stdio.h>
#include "cgvf.h"

static const char *SCENARIO =
    "name = \"pair\"\n"
    "[surface]\nkind = \"torus\"\nmajor = 6.0\nminor = 2.0\n"
    "[swarm]\nrobots = 2\nsensing_radius = 0.6\nsafe_radius = 0.4\nk = 0.6\nc = 3.0\n"
    "[estimator]\nmode = \"broadcast\"\n"
    "[target]\nomega_star = [0.0, 0.0]\n"
    "[run]\nduration = 1.0\n"
    "[initial]\nkind = \"explicit\"\n"
    "x = [[8.0, 0.0, 0.0], [7.9, 0.5, 0.1]]\n"
    "omega = [[0.0, 0.0], [0.3, 0.3]]\n";

int main(void) {
    CgvfSurface *torus = NULL;
    double p[3];
    if (cgvf_surface_new_torus(6.0, 2.0, &torus) != CGVF_STATUS_OK) return 1;
    if (cgvf_surface_eval(torus, 0.0, 0.0, p, 3) != CGVF_STATUS_OK) return 2;
    if (fabs(p[0] - 8.0) > 1e-12) return 3;
    if (cgvf_surface_eval(torus, 0.0, 0.0, p, 2) != CGVF_STATUS_DIMENSION_MISMATCH) return 4;
    cgvf_surface_free(torus);

    CgvfSimulation *sim = NULL;
    if (cgvf_simulation_from_toml(SCENARIO, &sim) != CGVF_STATUS_OK) {
        char msg[256];
        cgvf_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 5;
    }
    if (cgvf_simulation_step(sim, 100) != CGVF_STATUS_OK) return 6;
    CgvfMetrics m;
    if (cgvf_simulation_metrics(sim, &m) != CGVF_STATUS_OK) return 7;
    if (fabs(m.time - 0.1) > 1e-9) return 8;
    cgvf_simulation_free(sim);

    double w;
    if (cgvf_repulsion_weight(0.3, 0.4, 0.6, &w) != CGVF_STATUS_SEPARATION_VIOLATION) return 9;
    if (cgvf_last_error_message(NULL, 0) == 0) return 10;
    printf("ok %s\n", cgvf_version());
    return 0;
}
