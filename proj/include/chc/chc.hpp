#pragma once

#include "chc/error.hpp"
#include "chc/kernel.hpp"
#include "chc/lia.hpp"
#include "chc/model.hpp"
#include "chc/oracle.hpp"
#include "chc/pairing.hpp"
#include "chc/parser.hpp"
#include "chc/printer.hpp"
#include "chc/program_ops.hpp"
#include "chc/smtlib.hpp"
#include "chc/solver_client.hpp"
#include "chc/syntax.hpp"
