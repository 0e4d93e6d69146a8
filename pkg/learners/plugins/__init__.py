"""Plugin package for cobweb-lab learners.

Each module here holds one or more concrete BaseLearner subclasses; the
registry discovers them automatically.

Example plugin structure:
    # plugins/my_model.py
    from learners.base import BaseLearner

    class MyLearner(BaseLearner):
        name = "my-model"
        title = "My Model"
        family = "tree"
        order = 50
        ...
"""
