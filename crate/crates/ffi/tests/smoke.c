#include <stdio.h>
#include "simred.h"

int main(void) {
    SimredCatalog *cat = simred_catalog_new();
    if (!cat) return 10;
    size_t n = 0;
    if (simred_catalog_len(cat, &n) != SimredStatus_Ok || n == 0) return 11;
    double r = 1.0;
    bool pass = false;
    if (simred_verify_solution(cat, "nc-c2@tanh", 1e-9, 20, &r, &pass) != SimredStatus_Ok || !pass) return 12;
    SimredJet j;
    if (simred_solution_eval(cat, "missing", 1.0, 0.0, &j) != SimredStatus_UnknownEntry) return 13;
    if (simred_last_error() == NULL) return 14;
    simred_catalog_free(cat);
    printf("ok %zu %.3e\n", n, r);
    return 0;
}
