# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

import os

from polariton.config import RunConfig
from polariton.controller import RunController
from test.output_tester import OutputTester


class TestControllerHelp(OutputTester):
    """Test output of controller command `help COMMAND`.

    """

    # This expects to be run from the project root
    EXPECTED_OUTPUT_FILE = os.path.join(os.getcwd(), 'test/expected_output/controller_help.out')
    ABBREVIATIONS = ['d', 'r', 'th', 'sc', 'sw']


    @classmethod
    def setUpClass(cls):
        super(TestControllerHelp, cls).setUpClass()
        cls.maxDiff = None


    def test_help(self):
        controller = RunController(RunConfig(), out_dir=os.devnull, quiet=True)
        command_queue = [['help']]
        for command in sorted(controller.cmd.commands):
            command_queue.append(['help', command])
        for abbreviation in self.ABBREVIATIONS:
            command_queue.append(['help', abbreviation])

        self.redirect_output()
        try:
            statuses = [controller.run_command(argv) for argv in command_queue]
        finally:
            self.reset_output()

        self.assertEqual(set(statuses), {RunController.Status.OK})
        self.assertEqual(sorted(controller.cmd.commands),
                         ['dispersion', 'help', 'run', 'scurve', 'sweep', 'threshold'])
        self.compare_output()
