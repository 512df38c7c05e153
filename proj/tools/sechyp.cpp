#include "sechyp/util.hpp"
int main(){return 0;}
