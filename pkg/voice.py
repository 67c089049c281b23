import sys
import textwrap


class Voice:
    """Class the command line uses to report progress and results to the person"""

    def __init__(self, stream=None, quiet=False):
        self.stream = stream if stream is not None else sys.stderr
        self.quiet = quiet
        self.response_history = []

    def speak(self, message, prefix=""):
        """
        Output a message on the report channel

        Args:
            message (str): The message to output
            prefix (str): Prefix to add before the message
        """
        if not message:
            return

        self.response_history.append(message)
        print(f"{prefix}{message}", file=self.stream)

    def speak_multiline(self, message, prefix="", wrap_width=80):
        """
        Output a wrapped message, later lines indented under the prefix

        Args:
            message (str): The message to output
            prefix (str): Prefix to add before the first line
            wrap_width (int): Width to wrap text at
        """
        if not message:
            return

        self.response_history.append(message)
        wrapped_lines = textwrap.fill(message, width=wrap_width).split('\n')
        indent = " " * len(prefix)
        print(f"{prefix}{wrapped_lines[0]}", file=self.stream)
        for line in wrapped_lines[1:]:
            print(f"{indent}{line}", file=self.stream)

    def speak_error(self, error_message):
        """
        Output an error message; never silenced

        Args:
            error_message (str): The error message to display
        """
        print(f"error: {error_message}", file=self.stream)

    def speak_info(self, info_message):
        """
        Output an informational message unless quiet

        Args:
            info_message (str): The info message to display
        """
        if self.quiet:
            return
        print(f"INFO: {info_message}", file=self.stream)

    def speak_success(self, success_message):
        """
        Output a success message unless quiet

        Args:
            success_message (str): The success message to display
        """
        if self.quiet:
            return
        print(f"{success_message}", file=self.stream)

    def speak_table(self, rows, headers):
        """
        Output aligned columns, used for verify reports and summaries

        Args:
            rows (list): Sequences of cell values
            headers (list): Column titles
        """
        if self.quiet:
            return
        cells = [[str(h) for h in headers]] + [[self._cell(v) for v in row] for row in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
        for row in cells:
            print("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip(),
                  file=self.stream)

    @staticmethod
    def _cell(value):
        if isinstance(value, float):
            return f"{value:.6g}"
        return str(value)

    def get_response_history(self):
        """
        Get the history of responses

        Returns:
            list: List of previous responses
        """
        return self.response_history.copy()
