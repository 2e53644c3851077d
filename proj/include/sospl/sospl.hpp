#pragma once

#include "sospl/bounds.hpp"
#include "sospl/certificate.hpp"
#include "sospl/cnf.hpp"
#include "sospl/constraint_system.hpp"
#include "sospl/implicit_learning.hpp"
#include "sospl/moment_index.hpp"
#include "sospl/monomial.hpp"
#include "sospl/partial_examples.hpp"
#include "sospl/poly_text.hpp"
#include "sospl/polynomial.hpp"
#include "sospl/problem_format.hpp"
#include "sospl/query.hpp"
#include "sospl/sdpa_io.hpp"
#include "sospl/solver.hpp"
#include "sospl/sos_program.hpp"
#include "sospl/variables.hpp"
