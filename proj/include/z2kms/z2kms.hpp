#pragma once

#include "z2kms/error.hpp"
#include "z2kms/numerics.hpp"
#include "z2kms/car_fock.hpp"
#include "z2kms/functional.hpp"
#include "z2kms/quasifree.hpp"
#include "z2kms/crossed_z2.hpp"
#include "z2kms/gns_modular.hpp"
