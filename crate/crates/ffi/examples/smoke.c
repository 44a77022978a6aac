/* Builds a tree, solves a small planted Lasso instance and prints the result. */
#include <stdio.h>
#include <stdlib.h>
#include "qlb.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        QlbStatus s_ = (call);                                               \
        if (s_ != QLB_STATUS_OK) {                                           \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_, qlb_last_error()); \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    QlbTree *tree = NULL;
    CHECK(qlb_tree_new(8, &tree));
    CHECK(qlb_tree_update(tree, 1.0, 0.5, 3));
    CHECK(qlb_tree_update(tree, 0.5, -0.25, 6));
    double v = 0.0;
    CHECK(qlb_tree_read(tree, 3, &v));
    if (v != 0.25 || qlb_tree_support_len(tree) != 2) {
        return 1;
    }
    if (qlb_tree_update(tree, 1.0, 1.0, 99) != QLB_STATUS_INDEX_OUT_OF_RANGE) {
        return 1;
    }
    qlb_tree_free(tree);

    size_t planted[2];
    QlbSamples *samples = NULL;
    CHECK(qlb_samples_gen_hidden(16, 2, 0.1, 2000, 5, false, planted, &samples));
    QlbReport *report = NULL;
    CHECK(qlb_lasso_solve(samples, 0.2, QLB_MODE_CLASSICAL, 1, &report));
    double theta[16];
    CHECK(qlb_report_theta(report, theta, 16));
    QlbLedger ledger;
    CHECK(qlb_report_ledger(report, &ledger));
    printf("objective %.6f planted %zu %zu theta %.4f %.4f reads %llu\n", qlb_report_objective(report),
           planted[0], planted[1], theta[planted[0]], theta[planted[1]],
           (unsigned long long)(ledger.q_x + ledger.q_y));
    qlb_report_free(report);
    qlb_samples_free(samples);
    return 0;
}
