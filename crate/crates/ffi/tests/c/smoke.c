#include <math.h>
#include <stdio.h>

#include "barotropic_ns.h"

#define CHECK(call)                                                         \
    do {                                                                    \
        BnsStatus s_ = (call);                                              \
        if (s_ != BNS_STATUS_OK) {                                          \
            char msg_[256];                                                 \
            bns_last_error_message(msg_, sizeof msg_);                      \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_, msg_); \
            return 1;                                                       \
        }                                                                   \
    } while (0)

int main(void) {
    BnsLaws *laws = NULL;
    BnsProfile *profile = NULL;
    BnsSimulation *sim = NULL;
    BnsBoundary b = {1.0, 0.1, 0.5, 1.0, sqrt(0.375)};
    BnsScheme scheme = {40, 0.5, 0.5, 0.2, 1e-8, 0};
    double alpha, v_bar, residual, energy, l2;
    double u[41], v[41];

    CHECK(bns_laws_new_saint_venant(1.0, 1.0, 1.0, &laws));
    CHECK(bns_solve_steady(laws, &b, 40, &profile));
    CHECK(bns_profile_summary(profile, &alpha, &v_bar, &residual));
    CHECK(bns_simulation_new(laws, &b, &scheme, profile, 0.0, 0.0, &sim));
    CHECK(bns_simulation_run(sim));
    CHECK(bns_simulation_copy_state(sim, u, v, 41));
    CHECK(bns_simulation_distance(sim, profile, &energy, &l2));

    if (bns_simulation_step(NULL, NULL) != BNS_STATUS_NULL_POINTER) {
        return 2;
    }
    printf("version %s alpha* %.12f t %.3f L %.3e dist %.3e u(0) %.6f\n", bns_version(), alpha,
           bns_simulation_time(sim), energy, l2, u[20]);

    bns_simulation_free(sim);
    bns_profile_free(profile);
    bns_laws_free(laws);
    return fabs(alpha - 0.875045353581745) < 1e-10 && l2 < 1e-3 ? 0 : 3;
}
