"""Print the discretisation-order checks behind the operator and cell tests."""
from slrf.oracles import convergence_report

if __name__ == "__main__":
    for line in convergence_report():
        print(line)
